#include <math.h>
#include <stdio.h>
#include <string.h>

#include "ap3.h"

#define CHECK(call)                                                                \
    do {                                                                           \
        Ap3Status s_ = (call);                                                     \
        if (s_ != AP3_STATUS_OK) {                                                 \
            fprintf(stderr, "%s -> %d: %s\n", #call, (int)s_, ap3_last_error_message()); \
            return 1;                                                              \
        }                                                                          \
    } while (0)

int main(void) {
    double half[9];
    for (int i = 0; i < 9; i++) half[i] = 0.5;
    Ap3Density *f = NULL, *g = NULL;
    CHECK(ap3_density_new(3, 2, half, 9, &f));

    double lam = 0.0;
    CHECK(ap3_lambda3_spectral(f, &lam));
    if (fabs(lam - 0.125) > 1e-12) return 2;

    char *report = NULL;
    CHECK(ap3_improve(f, 1.0, 0.0, 0, &g, &report));
    CHECK(ap3_lambda3_direct(g, &lam));
    if (fabs(lam - 63.0 / 512.0) > 1e-12) return 3;
    if (strstr(report, "\"lambda3_g\"") == NULL) return 4;
    ap3_string_free(report);

    size_t members[4] = {0, 1, 3, 4};
    Ap3PointSet *cap = NULL;
    uint64_t count = 99;
    CHECK(ap3_set_new(3, 2, members, 4, &cap));
    CHECK(ap3_t3_nontrivial(cap, &count));
    if (count != 0) return 5;

    Ap3Density *bad = NULL;
    if (ap3_density_new(4, 1, half, 4, &bad) != AP3_STATUS_DOMAIN) return 6;
    if (ap3_last_error_message() == NULL) return 7;

    ap3_set_free(cap);
    ap3_density_free(g);
    ap3_density_free(f);
    printf("ok\n");
    return 0;
}
