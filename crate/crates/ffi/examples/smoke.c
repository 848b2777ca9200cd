/* Minimal C consumer: runs a short heterogeneous flock and prints its state. */
#include <stdio.h>
#include <stdlib.h>

#include "hetflock.h"

static int check(HfStatus s, const char *what) {
    if (s != HF_STATUS_OK) {
        char msg[256];
        hf_last_error_message(msg, sizeof msg);
        fprintf(stderr, "%s failed (%d): %s\n", what, (int)s, msg);
        return 1;
    }
    return 0;
}

int main(void) {
    HfConfig *cfg = NULL;
    HfSimulation *sim = NULL;
    if (check(hf_config_preset("heterogeneous", &cfg), "preset")) return 1;
    if (check(hf_config_set_seed(cfg, 3), "seed")) return 1;
    if (check(hf_config_set_duration(cfg, 2.0), "duration")) return 1;
    if (check(hf_sim_new(cfg, &sim), "sim_new")) return 1;
    if (check(hf_sim_run(sim), "run")) return 1;

    size_t n = hf_sim_n_agents(sim);
    double *xy = malloc(2 * n * sizeof(double));
    if (check(hf_sim_positions(sim, xy, 2 * n), "positions")) return 1;
    HfMetrics m;
    if (check(hf_sim_metrics(sim, &m), "metrics")) return 1;
    printf("t=%.2f agents=%zu edges=%zu components=%zu x0=%.6f\n", hf_sim_time(sim), n, m.n_edges,
           m.n_components, xy[0]);

    HfConfig *bad = NULL;
    if (hf_config_preset("bogus", &bad) != HF_STATUS_UNKNOWN_SCENARIO) return 2;

    free(xy);
    hf_sim_free(sim);
    hf_config_free(cfg);
    return 0;
}
