#include <math.h>
#include <stdio.h>
#include "phasefield_lab.h"

#define CHECK(call)                                                              \
    do {                                                                         \
        PflabStatus s_ = (call);                                                 \
        if (s_ != PFLAB_STATUS_OK) {                                             \
            fprintf(stderr, "%s: %s (%s)\n", #call, pflab_status_str(s_),        \
                    pflab_last_error());                                         \
            return 1;                                                            \
        }                                                                        \
    } while (0)

int main(void) {
    double theta;
    CHECK(pflab_theta_eq(1.0, 2.0, &theta));
    if (fabs(theta * 180.0 / M_PI - 151.044975628) > 1e-6) return 2;

    PflabRun *run = NULL;
    CHECK(pflab_run_new("stefan", &run));
    CHECK(pflab_run_set(run, "integrator", "sts2"));
    CHECK(pflab_run_set(run, "end_time", "200"));
    if (pflab_run_set(run, "integrator", "rk4") != PFLAB_STATUS_CONFIG) return 3;

    PflabReport *rep = NULL;
    CHECK(pflab_run_execute(run, &rep));
    PflabSummary sum;
    CHECK(pflab_report_summary(rep, &sum));
    size_t n = 0;
    if (pflab_report_field(rep, "c", NULL, 0, &n) != PFLAB_STATUS_BUFFER_TOO_SMALL || n != 1800) return 4;
    printf("evals=%llu final_time=%g cells=%zu\n", (unsigned long long)sum.rhs_evals, sum.final_time, n);
    pflab_report_free(rep);
    pflab_run_free(run);
    return sum.final_time == 200.0 ? 0 : 5;
}
