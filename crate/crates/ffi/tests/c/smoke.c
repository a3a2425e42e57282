#include <stdio.h>
#include <string.h>

#include "anonqc.h"

#define CHECK(cond)                                                  \
    do {                                                             \
        if (!(cond)) {                                               \
            fprintf(stderr, "%s:%d: check failed: %s\n", __FILE__,   \
                    __LINE__, #cond);                                \
            return 1;                                                \
        }                                                            \
    } while (0)

int main(void) {
    size_t values[3] = {2, 0, 5};
    AnqRunOptions opts = anq_run_options_default();
    opts.seed = 7;

    AnqRun *run = NULL;
    CHECK(anq_run_protocol_two(values, 3, &opts, &run) == ANQ_STATUS_OK);
    CHECK(!anq_run_aborted(run));

    size_t got[3];
    size_t len = 0;
    CHECK(anq_run_recovered(run, got, 3, &len) == ANQ_STATUS_OK);
    CHECK(len == 3);
    CHECK(got[0] + got[1] + got[2] == 7);

    char *json = anq_run_transcript_json(run);
    CHECK(json != NULL);
    CHECK(strstr(json, "\"schema_version\": 1") != NULL);
    bool consistent = false;
    CHECK(anq_verify_transcript(json, &consistent) == ANQ_STATUS_OK);
    CHECK(consistent);
    anq_string_free(json);
    anq_run_free(run);

    opts.d = 3;
    run = NULL;
    CHECK(anq_run_protocol_two(values, 3, &opts, &run) == ANQ_STATUS_DOMAIN);
    CHECK(run == NULL);
    CHECK(anq_last_error() != NULL);

    printf("c smoke ok (%s)\n", anq_version());
    return 0;
}
