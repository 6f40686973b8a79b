#include <math.h>
#include <stdio.h>
#include "deadbeat.h"

#define CHECK(cond)                                              \
    do {                                                         \
        if (!(cond)) {                                           \
            char msg[256];                                       \
            deadbeat_last_error_message(msg, sizeof msg);        \
            fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__,        \
                    __LINE__, #cond, msg);                       \
            return 1;                                            \
        }                                                        \
    } while (0)

int main(void) {
    const double pi = 3.14159265358979323846;
    double c = cos(pi / 3), s = sin(pi / 3);
    double a[4] = {c, s, -s, c};
    double b[2] = {1.0, 0.0};
    DeadbeatSystem *sys = NULL;
    CHECK(deadbeat_system_new(a, b, 2, 1, DEADBEAT_FORM_FACTORED, &sys) == DEADBEAT_STATUS_OK);

    DeadbeatReport report;
    DeadbeatTolerance tol = deadbeat_tolerance_default();
    CHECK(deadbeat_check(sys, &tol, &report) == DEADBEAT_STATUS_OK);
    CHECK(report.pbh_pass && report.geometric_pass && report.horizon == 2);

    double k2[2], k[2], resid;
    CHECK(deadbeat_gain(sys, false, NULL, k2, k, 2, &resid) == DEADBEAT_STATUS_OK);
    CHECK(fabs(k2[0] - 1.0) < 1e-10 && fabs(k2[1] + c / s) < 1e-10);

    DeadbeatTracker *tracker = NULL;
    CHECK(deadbeat_tracker_new(sys, NULL, &tracker) == DEADBEAT_STATUS_OK);
    double xhat[2] = {1.0, 1.0}, x[2] = {3.0, 5.0};
    for (int step = 0; step < 3; ++step) {
        double next_hat[2], next[2] = {a[0] * x[0] + a[1] * x[1], a[2] * x[0] + a[3] * x[1]};
        CHECK(deadbeat_tracker_step(tracker, xhat, x, 2, next_hat) == DEADBEAT_STATUS_OK);
        xhat[0] = next_hat[0]; xhat[1] = next_hat[1];
        x[0] = next[0]; x[1] = next[1];
    }
    CHECK(fabs(xhat[0] - x[0]) < 1e-9 && fabs(xhat[1] - x[1]) < 1e-9);

    double bad[3] = {1.0, -1.0, 1.0}, one[3] = {1.0, 1.0, 1.0}, out[3];
    CHECK(deadbeat_demo_step(DEADBEAT_DEMO_POSITIVE, bad, one, out) == DEADBEAT_STATUS_DOMAIN_VIOLATION);
    CHECK(deadbeat_last_error_message(NULL, 0) > 0);

    deadbeat_tracker_free(tracker);
    deadbeat_system_free(sys);
    puts("c smoke test ok");
    return 0;
}
