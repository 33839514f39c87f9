#include <math.h>
#include <stdio.h>
#include <stdlib.h>

#include "hetspd.h"

#define CHECK(call)                                                              \
    do {                                                                         \
        HetspdStatus s_ = (call);                                                \
        if (s_ != HETSPD_STATUS_OK) {                                            \
            fprintf(stderr, "%s: %s (%s)\n", #call, hetspd_status_name(s_),      \
                    hetspd_last_error_message());                                \
            return 1;                                                            \
        }                                                                        \
    } while (0)

int main(int argc, char **argv) {
    if (argc < 2) {
        fprintf(stderr, "usage: smoke <scratch-file>\n");
        return 2;
    }
    HetspdMatrix *a = NULL;
    CHECK(hetspd_matrix_generate(96, 16, 7, NULL, &a));

    HetspdConfig cfg = hetspd_config_default();
    cfg.fraction = 0.5;
    cfg.eps = 1e-10;

    size_t n = hetspd_matrix_size(a);
    double *rhs = malloc(n * sizeof *rhs);
    double *x_cg = malloc(n * sizeof *x_cg);
    double *x_ch = malloc(n * sizeof *x_ch);
    for (size_t i = 0; i < n; i++) rhs[i] = 1.0 + 0.01 * (double)i;

    HetspdStats st;
    CHECK(hetspd_solve_cg(a, &cfg, rhs, n, x_cg, &st));
    if (!st.converged || st.scalar_transfers != 2 * st.iterations) return 3;
    CHECK(hetspd_solve_cholesky(a, &cfg, rhs, n, x_ch, NULL));
    for (size_t i = 0; i < n; i++)
        if (fabs(x_cg[i] - x_ch[i]) > 1e-6 * (1.0 + fabs(x_ch[i]))) return 4;

    CHECK(hetspd_matrix_save(a, argv[1]));
    HetspdMatrix *b = NULL;
    CHECK(hetspd_matrix_load(argv[1], &b));
    double va, vb;
    CHECK(hetspd_matrix_element(a, 40, 3, &va));
    CHECK(hetspd_matrix_element(b, 40, 3, &vb));
    if (va != vb) return 5;

    if (hetspd_matrix_element(b, n, 0, &vb) != HETSPD_STATUS_OUT_OF_RANGE) return 6;

    hetspd_matrix_free(b);
    hetspd_matrix_free(a);
    free(rhs);
    free(x_cg);
    free(x_ch);
    printf("ok\n");
    return 0;
}
