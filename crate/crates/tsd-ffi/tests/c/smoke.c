#include <stdio.h>
#include "tsd.h"
int main(void) {
    TsdMachine *m = NULL;
    if (tsd_machine_new("let x = ref 0 in link x 5; step; peek (deref x)", 0, NULL, &m) != TSD_STATUS_OK) {
        fprintf(stderr, "%s\n", tsd_last_error_message());
        return 1;
    }
    TsdOutcome o; int64_t v;
    tsd_machine_run(m, &o, &v);
    size_t n; tsd_machine_peek_count(m, &n);
    printf("tsd %s outcome=%d value=%lld peeks=%zu\n", tsd_version(), (int)o, (long long)v, n);
    tsd_machine_free(m);
    return o == TSD_OUTCOME_FINAL && v == 5 ? 0 : 1;
}
