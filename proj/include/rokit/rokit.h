// Copyright 2026 The rokit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


/* C interface to rokit. Every function returns a status code; results come
 * back through out-parameters. Strings returned by a session stay valid until
 * the next call on that session. */

#ifndef ROKIT_ROKIT_H
#define ROKIT_ROKIT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define ROKIT_API __declspec(dllexport)
#else
#define ROKIT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rokit_status {
  ROKIT_OK = 0,
  ROKIT_ERR_INVALID = 2,   /* validation or I/O failure */
  ROKIT_ERR_NUMERICAL = 3, /* the computation itself failed */
  ROKIT_ERR_ARGUMENT = 4   /* null handle, null pointer or out-of-range index */
} rokit_status;

typedef struct rokit_session rokit_session;
typedef struct rokit_channel rokit_channel;

ROKIT_API const char* rokit_version(void);
ROKIT_API size_t rokit_subcommand_count(void);
ROKIT_API const char* rokit_subcommand_name(size_t index);
/* Exit code of the command-line tool for a status. */
ROKIT_API int rokit_exit_code(rokit_status status);

ROKIT_API rokit_session* rokit_session_create(void);
ROKIT_API void rokit_session_destroy(rokit_session* session);

ROKIT_API rokit_status rokit_session_set_threads(rokit_session* session, int threads);
ROKIT_API rokit_status rokit_session_set_seed(rokit_session* session, uint64_t seed);
ROKIT_API rokit_status rokit_session_set_output_dir(rokit_session* session, const char* path);

/* Relative paths inside the config resolve against the config's directory. */
ROKIT_API rokit_status rokit_session_load_config(rokit_session* session, const char* path);
ROKIT_API rokit_status rokit_session_load_config_text(rokit_session* session, const char* json_text,
                                                      const char* base_dir);

/* Checks the loaded config for a subcommand. ROKIT_OK with zero diagnostics
 * means `run` would accept it. */
ROKIT_API rokit_status rokit_session_validate(rokit_session* session, const char* subcommand);
ROKIT_API size_t rokit_session_diagnostic_count(const rokit_session* session);
ROKIT_API const char* rokit_session_diagnostic(const rokit_session* session, size_t index);

ROKIT_API rokit_status rokit_session_run(rokit_session* session, const char* subcommand);
/* One-line JSON summary of the last run. */
ROKIT_API const char* rokit_session_summary(const rokit_session* session);
ROKIT_API const char* rokit_session_last_error(const rokit_session* session);

/* Steady-state SNR growth rate in 1/s. Frequencies are f = omega / 2pi in Hz. */
ROKIT_API rokit_status rokit_snr_slope(double kappa_r_hz, double kappa_ext_hz, double chi_qr_hz, double photons,
                                       double eta, double* out_per_second);

/* Leaked population after m cycles of the leakage superoperator. */
ROKIT_API rokit_status rokit_superoperator_leakage(double l_up, double l_down, int m, double p_ini, double* out);

/* Boltzmann populations of `count` levels (Hz) at temperature_k kelvin. */
ROKIT_API rokit_status rokit_thermal_populations(const double* levels_hz, size_t count, double temperature_k,
                                                 double* out_populations);

/* joint[12] is P(s', x | s) ordered s = g, e; s' = g, e, leaked; x = 0, 1. */
ROKIT_API rokit_status rokit_channel_create(const double* joint, double p0_leaked_g, double p0_leaked_e,
                                            rokit_channel** out);
ROKIT_API void rokit_channel_destroy(rokit_channel* channel);
/* out[18]: for each of F, R, Q, F_qnd, Xi, L the values for g, e and the mean. */
ROKIT_API rokit_status rokit_channel_metrics(const rokit_channel* channel, double* out);

#ifdef __cplusplus
}
#endif

#endif /* ROKIT_ROKIT_H */
