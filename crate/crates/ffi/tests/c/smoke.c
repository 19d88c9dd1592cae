#include <stdio.h>
#include "licurv.h"
int main(void) {
  LicurvGraph *g = NULL;
  if (licurv_graph_generate("path:4", "unit", "unit", &g) != LICURV_STATUS_OK) return 1;
  double rho; size_t k;
  licurv_rho(g, 0, 2, 1.0, 2.0, "const:1", 0, &rho, &k);
  printf("rho=%g k=%zu\n", rho, k);
  if (k != 2 || rho != 8.0) return 2;
  LicurvGraph *bad = NULL;
  if (licurv_graph_generate("bad", "unit", "unit", &bad) != LICURV_STATUS_INVALID_ARGUMENT) return 3;
  if (licurv_last_error() == NULL) return 4;
  licurv_graph_free(g);
  return 0;
}
