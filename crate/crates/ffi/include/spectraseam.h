#ifndef SPECTRASEAM_H
#define SPECTRASEAM_H

/* Generated by cbindgen from crates/ffi. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum SsStatus {
  SS_STATUS_OK = 0,
  /**
   * A required pointer was null or a length was inconsistent.
   */
  SS_STATUS_INVALID_ARGUMENT = 1,
  /**
   * Malformed or truncated WAV data.
   */
  SS_STATUS_FORMAT = 2,
  /**
   * Valid WAV in a codec or layout that is not handled.
   */
  SS_STATUS_UNSUPPORTED = 3,
  /**
   * The tempo ratio between the tracks is outside [0.5, 2].
   */
  SS_STATUS_INCOMPATIBLE_TEMPO = 4,
  /**
   * Not enough audio, beats or frames.
   */
  SS_STATUS_TOO_SHORT = 5,
  /**
   * Tempo could not be estimated reliably.
   */
  SS_STATUS_LOW_CONFIDENCE = 6,
  /**
   * Invalid configuration, such as a non-COLA hop.
   */
  SS_STATUS_CONFIG = 7,
  /**
   * A value was out of range.
   */
  SS_STATUS_RANGE = 8,
  /**
   * Array shapes did not match.
   */
  SS_STATUS_SHAPE = 9,
  /**
   * Empty input where samples are required.
   */
  SS_STATUS_EMPTY_INPUT = 10,
  /**
   * I/O or image encoding failure.
   */
  SS_STATUS_IO = 11,
  /**
   * A panic was caught at the boundary.
   */
  SS_STATUS_INTERNAL = 12,
} SsStatus;

/**
 * Cell label in a cut: which input the cell is taken from.
 */
typedef enum SsLabel {
  SS_LABEL_A = 0,
  SS_LABEL_B = 1,
} SsLabel;

/**
 * Mono audio clip.
 */
typedef struct SsClip SsClip;

/**
 * Output of [`ss_transition`].
 */
typedef struct SsTransition SsTransition;

/**
 * Pipeline settings. Obtain defaults from [`ss_config_default`].
 */
typedef struct SsConfig {
  size_t fft_size;
  size_t hop;
  size_t overlap_beats;
  /**
   * Continue when a tempo estimate is low-confidence.
   */
  bool force_tempo;
  bool has_a_start;
  /**
   * Start of A's overlap in seconds; used when `has_a_start` is set.
   */
  double a_start;
  bool has_b_start;
  /**
   * Start of B's overlap in seconds of the stretched track.
   */
  double b_start;
} SsConfig;

/**
 * Byte buffer owned by the library; release with [`ss_buffer_free`].
 */
typedef struct SsBuffer {
  uint8_t *data;
  size_t len;
} SsBuffer;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread, or null if
 * there has been none. Valid until the next failing call on this thread.
 */
const char *ss_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ss_version(void);

struct SsConfig ss_config_default(void);

/**
 * Copies `len` samples into a new clip.
 */
enum SsStatus ss_clip_from_samples(const float *samples,
                                   size_t len,
                                   uint32_t sample_rate,
                                   struct SsClip **out);

/**
 * Decodes WAV bytes (PCM or 32-bit float, mono or stereo) into a clip.
 */
enum SsStatus ss_clip_from_wav(const uint8_t *data, size_t len, struct SsClip **out);

void ss_clip_free(struct SsClip *clip);

/**
 * Number of samples, or 0 for a null clip.
 */
size_t ss_clip_len(const struct SsClip *clip);

/**
 * Sample rate in Hz, or 0 for a null clip.
 */
uint32_t ss_clip_sample_rate(const struct SsClip *clip);

/**
 * Borrowed pointer to the samples; valid while the clip lives.
 */
const float *ss_clip_samples(const struct SsClip *clip);

/**
 * Encodes the clip as 16-bit PCM WAV into `out`.
 */
enum SsStatus ss_clip_encode_wav(const struct SsClip *clip, struct SsBuffer *out);

void ss_buffer_free(struct SsBuffer buffer);

/**
 * Runs the full pipeline from track `a` into track `b`.
 */
enum SsStatus ss_transition(const struct SsClip *a,
                            const struct SsClip *b,
                            const struct SsConfig *config,
                            struct SsTransition **out);

void ss_transition_free(struct SsTransition *t);

/**
 * Borrowed output audio; valid while the transition lives.
 */
const struct SsClip *ss_transition_output(const struct SsTransition *t);

double ss_transition_cut_cost(const struct SsTransition *t);

double ss_transition_tempo_a(const struct SsTransition *t);

double ss_transition_tempo_b(const struct SsTransition *t);

double ss_transition_stretch_ratio(const struct SsTransition *t);

/**
 * Overlap length in STFT frames.
 */
size_t ss_transition_frames(const struct SsTransition *t);

/**
 * Number of frequency bins in the seam.
 */
size_t ss_transition_bins(const struct SsTransition *t);

/**
 * Flip frames of one bin. `flips` receives a borrowed pointer valid while
 * the transition lives.
 */
enum SsStatus ss_transition_seam(const struct SsTransition *t,
                                 size_t bin,
                                 const size_t **flips,
                                 size_t *count);

/**
 * Min-cut between two frame-major `frames x bins` dB grids.
 *
 * Writes one [`SsLabel`] per cell into `labels` (same layout) and the cut
 * cost into `cost`. Either output may be null if not wanted.
 */
enum SsStatus ss_min_cut(const double *a_db,
                         const double *b_db,
                         size_t frames,
                         size_t bins,
                         enum SsLabel *labels,
                         double *cost);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPECTRASEAM_H */
