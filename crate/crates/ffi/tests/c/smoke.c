#include <math.h>
#include <stdio.h>
#include "dbl.h"

int main(void) {
    const double mu[2] = {0.08, 0.05};
    const double sigma[4] = {0.04, 0.01, 0.01, 0.02};
    const double pick[2] = {1.0, -1.0};
    const double omega[1] = {0.02};
    const double y[1] = {0.05};
    const double x[2] = {0.0, 0.0};
    double total[2], hedging[2], merton[2];
    DblMarket *m = NULL;
    DblPolicy *p = NULL;
    char msg[256];

    if (dbl_market_new(2, mu, sigma, 0.02, 1.0, &m) != DBL_STATUS_OK) return 1;
    if (dbl_policy_new(m, 1, pick, omega, y, 4.0, &p) != DBL_STATUS_OK) return 2;
    if (dbl_policy_weights(p, 0.25, x, total, hedging) != DBL_STATUS_OK) return 3;
    if (dbl_market_merton_weights(m, 4.0, merton) != DBL_STATUS_OK) return 4;
    if (!isfinite(total[0]) || !isfinite(hedging[1])) return 5;
    if (dbl_policy_new(m, 1, pick, omega, y, 0.5, &p) != DBL_STATUS_GAMMA_OUT_OF_RANGE) return 6;
    if (dbl_last_error_message(msg, sizeof msg) == 0) return 7;
    if (dbl_policy_weights(NULL, 0.0, x, total, NULL) != DBL_STATUS_NULL_POINTER) return 8;
    printf("dbl %s: total %.6f %.6f, merton %.6f %.6f\n", dbl_version(), total[0], total[1], merton[0], merton[1]);
    dbl_policy_free(p);
    dbl_market_free(m);
    return 0;
}
