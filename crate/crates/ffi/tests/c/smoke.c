#include <stdio.h>
#include <string.h>

#include "frobkit.h"

static const char *CUBIC =
    "kind = \"potential\"\n"
    "chart = [\"t\"]\n"
    "[potential]\n"
    "metric = [[\"1\"]]\n"
    "potential = \"t^3/6\"\n"
    "unit = \"t\"\n";

int main(void) {
    const char *names[] = {"x", "y"};
    FkChart *chart = NULL;
    if (fk_chart_new(names, 2, false, &chart) != FK_STATUS_OK) return 10;

    FkField *f = NULL;
    if (fk_field_parse(chart, "x^2*y + 1/3", &f) != FK_STATUS_OK) return 11;
    FkField *fx = NULL;
    if (fk_field_diff(f, 0, &fx) != FK_STATUS_OK) return 12;
    char *s = NULL;
    if (fk_field_to_string(fx, &s) != FK_STATUS_OK) return 13;
    printf("%s\n", s);
    fk_string_free(s);

    const char *at[] = {"3", "1/2"};
    double re = 0, im = 0;
    if (fk_field_eval(f, at, 2, &re, &im) != FK_STATUS_OK) return 14;
    if (re != 4.5 + 1.0 / 3.0 || im != 0) return 15;

    FkField *bad = NULL;
    if (fk_field_parse(chart, "x +* y", &bad) != FK_STATUS_PARSE || bad != NULL) return 16;
    if (strlen(fk_last_error()) == 0) return 17;

    FkOutcome *out = NULL;
    FkFlags flags = {5, 0, 0.0};
    if (fk_run("check-frobenius", CUBIC, &flags, &out) != FK_STATUS_OK) return 18;
    int code = fk_outcome_exit_code(out);
    char *report = fk_outcome_report(out);
    int has_points = strstr(report, "points = 5") != NULL;
    fk_string_free(report);
    fk_outcome_free(out);
    fk_field_free(fx);
    fk_field_free(f);
    fk_chart_free(chart);
    if (code != 0 || !has_points) return 19;
    printf("ok %s\n", fk_version());
    return 0;
}
