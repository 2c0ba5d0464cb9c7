#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "laurentlab.h"

namespace {

struct Session {
  ll_session* s = ll_session_new();
  ~Session() { ll_session_free(s); }
};

std::string exec(ll_session* s, const char* text, int* status,
                 int record = 0) {
  char* out = nullptr;
  *status = ll_exec(s, text, record, &out);
  std::string result = out ? out : "";
  ll_string_free(out);
  return result;
}

}  // namespace

TEST_CASE("session lifecycle and persistent state") {
  Session h;
  REQUIRE(h.s != nullptr);
  int status = 0;
  exec(h.s, "ring Q\nvars t", &status);
  CHECK(status == LL_OK);
  exec(h.s, "let phi = (t + t^2)", &status);
  CHECK(status == LL_OK);
  std::string out = exec(h.s, "invert phi prec (5)", &status);
  CHECK(status == LL_OK);
  CHECK(out == "t - t^2 + 2*t^3 - 5*t^4 + 14*t^5 + O(box: 5)\n");
}

TEST_CASE("status codes distinguish bad input from failed checks") {
  Session h;
  int status = 0;
  std::string out = exec(h.s, "ring Q\nvars t\nlet x = t +", &status);
  CHECK(status == LL_BAD_INPUT);
  CHECK(out.find("SyntaxError") != std::string::npos);

  Session h2;
  out = exec(h2.s, "ring Q\nvars t\ncheck invertible (t^2)", &status);
  CHECK(status == LL_CHECK_FAILED);
  CHECK(out == "not invertible: diag = [2]\n");
  CHECK(std::string(ll_session_error(h2.s)).empty());
}

TEST_CASE("record format is selected per call") {
  Session h;
  int status = 0;
  std::string out = exec(h.s, "ring Q\nvars t\nprint 1 + t", &status, 1);
  CHECK(status == LL_OK);
  CHECK(out == "laurentlab-record 1\nprint\t1 + t\n");
}

TEST_CASE("default precision is adjustable") {
  Session h;
  ll_session_set_prec(h.s, 3);
  int status = 0;
  std::string out = exec(h.s, "ring Q\nvars t\ninvert (t + t^2)", &status);
  CHECK(out == "t - t^2 + 2*t^3 + O(box: 3)\n");
}

TEST_CASE("ll_verify reports and flags mutations") {
  Session h;
  char* report = nullptr;
  int status = ll_verify(h.s, 20260823ULL, 2, "", &report);
  REQUIRE(report != nullptr);
  CHECK(status == LL_OK);
  CHECK(std::string(report).find("0 failed") != std::string::npos);
  ll_string_free(report);

  report = nullptr;
  status = ll_verify(h.s, 20260823ULL, 4, "wedge_sign_flip", &report);
  CHECK(status == LL_CHECK_FAILED);
  ll_string_free(report);

  report = nullptr;
  status = ll_verify(h.s, 20260823ULL, 4, "no_such_mutation", &report);
  CHECK(status == LL_BAD_INPUT);
  ll_string_free(report);
}

TEST_CASE("null arguments are rejected, not crashed on") {
  CHECK(ll_exec(nullptr, "print 1", 0, nullptr) == LL_BAD_INPUT);
  Session h;
  CHECK(ll_exec(h.s, nullptr, 0, nullptr) == LL_BAD_INPUT);
  ll_session_free(nullptr);
  ll_string_free(nullptr);
  CHECK(std::string(ll_session_error(nullptr)).empty());
}
