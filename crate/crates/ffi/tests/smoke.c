#include <stdio.h>
#include <string.h>
#include "lattice_index.h"

static int fail(const char *what) {
    fprintf(stderr, "%s: %s\n", what, li_last_error_message());
    return 1;
}

int main(void) {
    LiSystem *sys = NULL;
    int64_t num = 0, den = 0;

    if (li_system_builtin("shift-walk-d2", &sys) != LI_STATUS_OK) return fail("builtin");
    if (li_index(sys, &num, &den) != LI_STATUS_OK) return fail("index");
    if (num != 2 || den != 1) return fail("shift-walk-d2 index");
    li_system_free(sys);

    if (li_system_builtin("factor-shift-qca", &sys) != LI_STATUS_OK) return fail("builtin");
    if (li_index(sys, &num, &den) != LI_STATUS_OK || num != 2 || den != 3) return fail("factor-shift index");
    if (strcmp(li_system_kind(sys), "qca_circuit") != 0) return fail("kind");
    li_system_free(sys);

    if (li_system_builtin("cluster-qca", &sys) != LI_STATUS_OK) return fail("builtin");
    LiReport *rep = NULL;
    if (li_verify(sys, 1.0, 0, 7, &rep) != LI_STATUS_OK || !li_report_passed(rep)) return fail("verify");
    char *json = li_report_json(rep);
    if (json == NULL || strstr(json, "\"index\":\"1/1\"") == NULL) return fail("report json");
    li_string_free(json);
    li_report_free(rep);
    li_system_free(sys);

    const char *bad = "{\"type\":\"walk\",\"M\":4,\"dims\":[1,1,1,1],\"band\":1,"
                      "\"blocks\":[{\"x\":0,\"y\":0,\"re\":[[2.0]],\"im\":[[0.0]]}]}";
    if (li_system_from_json(bad, &sys) != LI_STATUS_INPUT_ERROR) return fail("non-unitary accepted");
    if (strstr(li_last_error_message(), "unitary") == NULL) return fail("error message");
    if (li_index(NULL, &num, &den) != LI_STATUS_NULL_ARGUMENT) return fail("null handle");

    printf("ok %s\n", li_version());
    return 0;
}
