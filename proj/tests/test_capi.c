/* Copyright 2026 The rokit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* Exercises the shared library through its C header, compiled as C. */

#include <math.h>
#include <stdio.h>
#include <string.h>

#include "rokit/rokit.h"

static int failures = 0;

#define EXPECT(cond)                                              \
  do {                                                            \
    if (!(cond)) {                                                \
      fprintf(stderr, "%s:%d: failed: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                 \
    }                                                             \
  } while (0)

static void test_functions(void) {
  double v = 0.0;
  EXPECT(rokit_superoperator_leakage(0.1, 0.3, 0, 0.2, &v) == ROKIT_OK && v == 0.2);
  EXPECT(rokit_superoperator_leakage(0.1, 0.3, 5000, 0.0, &v) == ROKIT_OK && fabs(v - 0.25) < 1e-12);
  EXPECT(rokit_superoperator_leakage(0.1, 0.3, -1, 0.0, &v) == ROKIT_ERR_INVALID);
  EXPECT(rokit_superoperator_leakage(0.1, 0.3, 1, 0.0, NULL) == ROKIT_ERR_ARGUMENT);

  EXPECT(rokit_snr_slope(12e6, 11.6e6, -6.4e6, 2.8, 0.79, &v) == ROKIT_OK);
  EXPECT(fabs(v * 1e-9 / 0.2856 - 1.0) < 1e-3);
  EXPECT(rokit_snr_slope(12e6, 13e6, -6.4e6, 1.2, 0.6, &v) == ROKIT_ERR_INVALID);

  const double levels[2] = {3e9, 3e9};
  double pops[2] = {0.0, 0.0};
  EXPECT(rokit_thermal_populations(levels, 2, 0.05, pops) == ROKIT_OK && fabs(pops[0] - 0.5) < 1e-15);
  EXPECT(rokit_thermal_populations(levels, 2, 0.0, pops) == ROKIT_ERR_INVALID);
}

static void test_channel(void) {
  double joint[12] = {0};
  rokit_channel* ch = NULL;
  double m[18];
  joint[0] = 1.0;  /* P(g, 0 | g) */
  joint[9] = 1.0;  /* P(e, 1 | e) */
  EXPECT(rokit_channel_create(joint, 0.0, 0.0, &ch) == ROKIT_OK && ch != NULL);
  EXPECT(rokit_channel_metrics(ch, m) == ROKIT_OK);
  for (int i = 0; i < 12; ++i) EXPECT(m[i] == 1.0); /* F, R, Q, F_qnd */
  for (int i = 12; i < 18; ++i) EXPECT(m[i] == 0.0); /* Xi, L */
  rokit_channel_destroy(ch);

  joint[0] = 0.9;
  ch = NULL;
  EXPECT(rokit_channel_create(joint, 0.0, 0.0, &ch) == ROKIT_ERR_INVALID && ch == NULL);
  EXPECT(rokit_channel_metrics(NULL, m) == ROKIT_ERR_ARGUMENT);
  rokit_channel_destroy(NULL);
}

static void test_session(const char* scratch) {
  rokit_session* s = rokit_session_create();
  EXPECT(s != NULL);
  EXPECT(rokit_subcommand_count() == 11);
  EXPECT(rokit_subcommand_name(rokit_subcommand_count()) == NULL);
  EXPECT(rokit_exit_code(ROKIT_ERR_NUMERICAL) == 3);

  EXPECT(rokit_session_load_config_text(
             s, "{\"levels_hz\": [0, 4.633e9], \"temperature_mk\": 51, \"bogus\": 1}", ".") == ROKIT_OK);
  EXPECT(rokit_session_validate(s, "thermal") == ROKIT_ERR_INVALID);
  EXPECT(rokit_session_diagnostic_count(s) == 1);
  EXPECT(strstr(rokit_session_diagnostic(s, 0), "$.bogus") != NULL);
  EXPECT(rokit_session_diagnostic(s, 1) == NULL);

  EXPECT(rokit_session_load_config_text(s, "{\"levels_hz\": [0, 4.633e9], \"temperature_mk\": 51}", ".") == ROKIT_OK);
  EXPECT(rokit_session_set_output_dir(s, scratch) == ROKIT_OK);
  EXPECT(rokit_session_validate(s, "thermal") == ROKIT_OK);
  EXPECT(rokit_session_run(s, "thermal") == ROKIT_OK);
  EXPECT(strstr(rokit_session_summary(s), "\"status\":\"ok\"") != NULL);

  EXPECT(rokit_session_set_threads(s, 0) == ROKIT_ERR_ARGUMENT);
  EXPECT(rokit_session_load_config(s, "/no/such/config.json") == ROKIT_ERR_INVALID);
  EXPECT(strlen(rokit_session_last_error(s)) > 0);
  rokit_session_destroy(s);

  EXPECT(rokit_session_run(NULL, "thermal") == ROKIT_ERR_ARGUMENT);
  EXPECT(rokit_session_diagnostic_count(NULL) == 0);
}

int main(int argc, char** argv) {
  test_functions();
  test_channel();
  test_session(argc > 1 ? argv[1] : "capi_out");
  if (failures == 0) printf("capi: all checks passed (version %s)\n", rokit_version());
  return failures == 0 ? 0 : 1;
}
