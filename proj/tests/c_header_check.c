/* Compiled as C: verifies the public header is C-clean and the library links. */
#include <stdio.h>
#include <string.h>

#include "iuq/iuq.h"

int main(void) {
  if (iuq_version() == NULL) return 1;

  double z = 0.0;
  if (iuq_normal_quantile(0.975, &z) != IUQ_OK) return 1;
  if (z < 1.9 || z > 2.0) return 1;

  iuq_data* data = NULL;
  if (iuq_data_create(&data) != IUQ_OK) return 1;
  double values[3] = {1.0, 2.0, 3.0};
  if (iuq_data_add_values(data, values, 3) != IUQ_OK) return 1;
  if (iuq_data_model_count(data) != 1) return 1;

  iuq_model* model = NULL;
  if (iuq_model_create_mean(1, &model) != IUQ_OK) return 1;

  iuq_variance_estimate est;
  memset(&est, 0, sizeof(est));
  if (iuq_estimate(data, model, 10, 2, 1.0, 0, 42u, &est) != IUQ_OK) return 1;
  if (est.budget_used != 20) return 1;

  iuq_model_free(model);
  iuq_data_free(data);
  printf("c header check ok\n");
  return 0;
}
