#include <stdio.h>
#include "decwa.h"

int main(void) {
    double values[] = {0.0, 0.0, 0.1, 0.0, 0.0, 0.1, 9.0, 9.0, 9.1, 9.0, 9.0, 9.1};
    DecwaDataset *ds = NULL;
    DecwaResult *res = NULL;
    DecwaParamsC params;
    int64_t labels[6];

    decwa_params_default(&params);
    params.k = 2;
    if (decwa_dataset_new(values, 6, 2, &ds) != DECWA_STATUS_OK ||
        decwa_fit(ds, &params, &res) != DECWA_STATUS_OK) {
        fprintf(stderr, "error: %s\n", decwa_last_error_message());
        return 1;
    }
    decwa_result_labels(res, labels, 6);
    printf("clusters=%zu labels=", decwa_result_cluster_count(res));
    for (int i = 0; i < 6; i++) printf("%lld ", (long long)labels[i]);
    printf("\n");
    decwa_result_free(res);
    decwa_dataset_free(ds);
    return 0;
}
