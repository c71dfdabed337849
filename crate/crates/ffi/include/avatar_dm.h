#ifndef AVATAR_DM_H
#define AVATAR_DM_H

#pragma once

/* Generated by cbindgen from the avatar-dm-ffi sources. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AvatarStatus {
  AVATAR_STATUS_OK = 0,
  AVATAR_STATUS_NULL_POINTER = 1,
  AVATAR_STATUS_INVALID_UTF8 = 2,
  AVATAR_STATUS_INVALID_ARGUMENT = 3,
  AVATAR_STATUS_SESSION_ENDED = 4,
  AVATAR_STATUS_ASSET_ERROR = 5,
  AVATAR_STATUS_PANIC = 99,
} AvatarStatus;

/**
 * Loaded domain files and engine settings shared by sessions.
 */
typedef struct AvatarEngine AvatarEngine;

/**
 * One conversation.
 */
typedef struct AvatarSession AvatarSession;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or an empty string. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *avatar_last_error(void);

/**
 * Engine with the shipped ontology, model and lexicon.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage.
 */
enum AvatarStatus avatar_engine_new_default(struct AvatarEngine **out);

/**
 * Engine from files on disk. Any path may be null to use the shipped file.
 *
 * # Safety
 * Non-null paths must be NUL-terminated strings; `out` must be writable.
 */
enum AvatarStatus avatar_engine_from_files(const char *ontology,
                                           const char *model,
                                           const char *lexicon,
                                           struct AvatarEngine **out);

/**
 * Selects the policy for sessions created afterwards: "hand-crafted",
 * "learned" or "random".
 *
 * # Safety
 * `engine` must come from this library; `policy` must be NUL-terminated.
 */
enum AvatarStatus avatar_engine_set_policy(struct AvatarEngine *engine, const char *policy);

/**
 * # Safety
 * `engine` must come from this library and not be used afterwards. Null is ignored.
 */
void avatar_engine_free(struct AvatarEngine *engine);

/**
 * Starts a session. Sessions own their data and outlive the engine.
 *
 * # Safety
 * `engine` must come from this library; `out` must be writable.
 */
enum AvatarStatus avatar_session_new(const struct AvatarEngine *engine,
                                     uint64_t seed,
                                     struct AvatarSession **out);

/**
 * Opening prompt of the session, to be freed with `avatar_string_free`.
 *
 * # Safety
 * `session` must come from this library; `out` must be writable.
 */
enum AvatarStatus avatar_session_greeting(const struct AvatarSession *session, char **out);

/**
 * Feeds one user utterance and writes the agent turn as a JSON object.
 *
 * # Safety
 * `session` must come from this library; `utterance` must be NUL-terminated;
 * `out_json` must be writable.
 */
enum AvatarStatus avatar_session_step(struct AvatarSession *session,
                                      const char *utterance,
                                      char **out_json);

/**
 * # Safety
 * `session` must come from this library; `out` must be writable.
 */
enum AvatarStatus avatar_session_goal_reached(const struct AvatarSession *session, bool *out);

/**
 * # Safety
 * `session` must come from this library; `out` must be writable.
 */
enum AvatarStatus avatar_session_ended(const struct AvatarSession *session, bool *out);

/**
 * # Safety
 * `session` must come from this library and not be used afterwards. Null is ignored.
 */
void avatar_session_free(struct AvatarSession *session);

/**
 * # Safety
 * `s` must be a string returned by this library, freed at most once. Null is ignored.
 */
void avatar_string_free(char *s);

/**
 * Sharp-point count and its ratio for a belief series of at least two values.
 *
 * # Safety
 * `signal` must point to `len` doubles; the outputs must be writable.
 */
enum AvatarStatus avatar_haar_ncp(const double *signal,
                                  size_t len,
                                  size_t *out_ncp,
                                  double *out_ratio);

/**
 * Compound sentiment of `text` under the engine's lexicon.
 *
 * # Safety
 * `engine` must come from this library; `text` must be NUL-terminated;
 * `out` must be writable.
 */
enum AvatarStatus avatar_sentiment_compound(const struct AvatarEngine *engine,
                                            const char *text,
                                            double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AVATAR_DM_H */
