#include "laurentlab.h"

#include <cstring>
#include <string>

#include "dsl.hpp"

struct ll_session {
  laurent::dsl::Session session;
  std::string last_error;
};

namespace {

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p) std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

}  // namespace

extern "C" {

ll_session* ll_session_new(void) {
  try {
    return new ll_session();
  } catch (...) {
    return nullptr;
  }
}

void ll_session_free(ll_session* s) { delete s; }

void ll_session_set_seed(ll_session* s, unsigned long long seed) {
  if (s) s->session.set_seed(seed);
}

void ll_session_set_prec(ll_session* s, long long bound) {
  if (s) s->session.set_default_prec(bound);
}

int ll_exec(ll_session* s, const char* text, int record, char** output) {
  if (!s || !text) return LL_BAD_INPUT;
  if (output) *output = nullptr;
  s->last_error.clear();
  try {
    laurent::dsl::RunResult res = s->session.run(text);
    if (output) *output = dup_string(laurent::dsl::render(res, record != 0));
    return res.exit_code;
  } catch (const std::exception& e) {
    s->last_error = e.what();
    return LL_INTERNAL;
  } catch (...) {
    s->last_error = "unknown failure";
    return LL_INTERNAL;
  }
}

int ll_verify(ll_session* s, unsigned long long seed, int count,
              const char* mutation, char** report) {
  if (!s) return LL_BAD_INPUT;
  std::string script = "verify seed " + std::to_string(seed);
  if (count > 0) script += " count " + std::to_string(count);
  if (mutation && *mutation)
    script += std::string(" mutation ") + mutation;
  return ll_exec(s, script.c_str(), 0, report);
}

const char* ll_session_error(const ll_session* s) {
  return s ? s->last_error.c_str() : "";
}

void ll_string_free(char* p) { std::free(p); }

}  // extern "C"
