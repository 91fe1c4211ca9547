#include <stdio.h>
#include "newsdiff.h"

int main(void) {
    NdSimConfig cfg;
    NdTrajectory *traj = NULL;
    NdCounts last;
    uint64_t at = 0;
    NdAnalyticModel model;
    NdFractions f;

    nd_sim_config_default(&cfg);
    if (nd_simulate(&cfg, &traj) != ND_STATUS_OK) {
        char msg[256];
        nd_last_error(msg, sizeof msg);
        fprintf(stderr, "simulate failed: %s\n", msg);
        return 1;
    }
    nd_trajectory_counts(traj, nd_trajectory_len(traj) - 1, &last);
    if (nd_trajectory_converged_at(traj, &at) == ND_STATUS_OK)
        printf("converged at step %llu\n", (unsigned long long)at);
    printf("final white=%llu grey=%llu black=%llu\n",
           (unsigned long long)last.white, (unsigned long long)last.grey,
           (unsigned long long)last.black);
    nd_trajectory_free(traj);

    nd_model_default(&model);
    nd_model_eval(&model, 25.0, &f);
    printf("model t=25: x_w=%.6f x_g=%.6f x_b=%.6f\n", f.white, f.grey, f.black);
    printf("newsdiff %s\n", nd_version());
    return 0;
}
