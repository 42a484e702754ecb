#include <stdio.h>
#include <stdlib.h>
#include "linksched.h"

#define CHECK(call)                                                              \
  do {                                                                           \
    LsStatus st_ = (call);                                                       \
    if (st_ != LS_STATUS_OK) {                                                   \
      const char *msg_ = ls_last_error_message();                                \
      fprintf(stderr, "%s -> %d: %s\n", #call, (int)st_, msg_ ? msg_ : "(none)"); \
      return 1;                                                                  \
    }                                                                            \
  } while (0)

int main(void) {
  LsInstance *inst = NULL;
  CHECK(ls_instance_generate(11, 24, 60.0, 1.0, 8.0, &inst));
  LsSchedule *s = NULL;
  CHECK(ls_schedule_run(inst, LS_ALGORITHM_DISTRIBUTED_ADAPTIVE, LS_DUPLEX_HALF, LS_PRESET_THEORY_SAFE, 3, &s));
  size_t n = ls_schedule_selected_count(s);
  uint32_t *ids = malloc((n ? n : 1) * sizeof *ids);
  size_t written = 0;
  CHECK(ls_schedule_selected(s, ids, n, &written));
  bool ok = false;
  CHECK(ls_is_independent(inst, ids, written, &ok));
  printf("links=%zu selected=%zu slots=%llu independent=%d\n", ls_instance_link_count(inst), written,
         (unsigned long long)ls_schedule_total_slots(s), (int)ok);
  if (ls_instance_from_json("{", &inst) != LS_STATUS_FAILED || ls_last_error_message() == NULL) return 2;
  free(ids);
  ls_schedule_free(s);
  ls_instance_free(inst);
  return ok ? 0 : 3;
}
