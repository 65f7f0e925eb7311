/* Builds a two-site space, checks {a(f), a(f)^*} = |f|^2 and runs a campaign. */
#include <math.h>
#include <stdio.h>

#include "carlab.h"

#define CHECK(call)                                                          \
    do {                                                                     \
        CarlabStatus s_ = (call);                                            \
        if (s_ != CARLAB_STATUS_OK) {                                        \
            fprintf(stderr, "%s: %d %s\n", #call, (int)s_, carlab_last_error()); \
            return 1;                                                        \
        }                                                                    \
    } while (0)

int main(void) {
    CarlabModeSpace *space = NULL;
    CHECK(carlab_mode_space_new(2, 1, NULL, 0, &space));

    double re[2] = {0.6, 0.0}, im[2] = {0.0, 0.8};
    CarlabOperator *a = NULL, *astar = NULL, *p = NULL, *q = NULL, *anti = NULL;
    CHECK(carlab_operator_field(space, re, im, 2, false, &a));
    CHECK(carlab_operator_adjoint(a, &astar));
    CHECK(carlab_operator_mul(a, astar, &p));
    CHECK(carlab_operator_mul(astar, a, &q));
    CHECK(carlab_operator_add_scaled(p, q, 1.0, 0.0, &anti));
    for (size_t k = 0; k < carlab_operator_dim(anti); ++k) {
        double x, y;
        CHECK(carlab_operator_entry(anti, k, k, &x, &y));
        if (fabs(x - 1.0) > 1e-12 || fabs(y) > 1e-12) {
            fprintf(stderr, "anticommutator entry %zu = %g%+gi\n", k, x, y);
            return 1;
        }
    }

    CarlabReport *report = NULL;
    CHECK(carlab_run("partition", "{\"random_trials\": 5}", false, 0, 0, &report));
    char *csv = NULL;
    CHECK(carlab_report_csv(report, &csv));
    printf("%s", csv);
    int passed = carlab_report_passed(report);

    if (carlab_run("verify-car", "{\"space\": {\"site_count\": 13}}", false, 0, 0, &report) !=
        CARLAB_STATUS_CAP_EXCEEDED) {
        return 1;
    }

    carlab_string_free(csv);
    carlab_report_free(report);
    carlab_operator_free(anti);
    carlab_operator_free(q);
    carlab_operator_free(p);
    carlab_operator_free(astar);
    carlab_operator_free(a);
    carlab_mode_space_free(space);
    return passed ? 0 : 1;
}
