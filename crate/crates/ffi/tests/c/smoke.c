#include <math.h>
#include <stdio.h>
#include <stdlib.h>

#include "fsorf.h"

#define CHECK(call)                                                          \
    do {                                                                     \
        FsorfStatus s_ = (call);                                             \
        if (s_ != FSORF_STATUS_OK) {                                         \
            fprintf(stderr, "%s: %s (%s)\n", #call, fsorf_status_name(s_),   \
                    fsorf_last_error());                                     \
            return 1;                                                        \
        }                                                                    \
    } while (0)

int main(void) {
    double gamma_t;
    CHECK(fsorf_switching_threshold(16, 1e-6, &gamma_t));
    printf("gamma_t %.10f\n", gamma_t);

    FsorfFsoParams fso;
    FsorfRfParams rf;
    FsorfFading strong = {2.064, 1.342, 1.1};
    double a, b;
    CHECK(fsorf_fso_params_default(&fso));
    CHECK(fsorf_rf_params_default(&rf));
    CHECK(fsorf_fso_outage(&fso, &strong, gamma_t, &a));
    CHECK(fsorf_rf_outage(&rf, gamma_t, &b));
    printf("a %.6e b %.6e\n", a, b);

    FsorfNetworkSpec spec = {0.9, 0.22, 0.7, 0.5, 3, 2, 2, FSORF_PROTOCOL_P_PERSISTENCE};
    FsorfNetwork *net = NULL;
    CHECK(fsorf_network_solve(&spec, &net));
    for (size_t k = 1; k <= 3; k++) {
        FsorfNodeMetrics m;
        CHECK(fsorf_network_node(net, k, &m));
        printf("node %zu Th %.12f Qa %.12f\n", m.node, m.throughput, m.avg_buffer);
    }
    FsorfNodeMetrics m;
    FsorfStatus s = fsorf_network_node(net, 9, &m);
    if (s != FSORF_STATUS_INDEX_OUT_OF_RANGE) return 2;
    printf("error %s: %s\n", fsorf_status_name(s), fsorf_last_error());
    fsorf_network_free(net);

    FsorfOptimization opt;
    CHECK(fsorf_optimize_p(&spec, 1e-3, &opt));
    printf("p_star %.6f\n", opt.p_star);

    FsorfSimConfig sim = {1, 100000, 1000, FSORF_ARBITRATION_FORFEIT};
    FsorfSimulation *run = NULL;
    CHECK(fsorf_simulate(&spec, &sim, &run));
    FsorfNodeSimStats n;
    CHECK(fsorf_simulation_node(run, 1, &n));
    printf("sim node 1 Th %.4f\n", n.throughput);
    fsorf_simulation_free(run);
    return 0;
}
