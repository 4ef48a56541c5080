#include "misbelief/errors.hpp"
#include "misbelief/report.hpp"

#include <doctest.h>

using namespace misbelief;

TEST_CASE("number formatting") {
  CHECK(format_number(0.5, 4) == "0.5");
  CHECK(format_number(-1.0 / 7.0, 4) == "-0.1429");
  CHECK(format_number(-1.0 / 7.0, 9) == "-0.142857143");
  CHECK(format_number(-0.0, 4) == "0");
  CHECK(format_number(1e-20, 4) == "1e-20");
  CHECK(format_number(0.1, 17) == "0.10000000000000001");
}

TEST_CASE("csv quoting and provenance") {
  Table t({"a", "b"});
  t.add_row({"plain", "has,comma"});
  t.add_row({"has \"quote\"", ""});
  const std::string csv = t.to_csv({"solve", "demo", "0123", 7});
  CHECK(csv.find("# command: solve\n") != std::string::npos);
  CHECK(csv.find("# scenario: demo\n") != std::string::npos);
  CHECK(csv.find("# input_digest: fnv1a64:0123\n") != std::string::npos);
  CHECK(csv.find("# seed: 7\n") != std::string::npos);
  CHECK(csv.find("a,b\nplain,\"has,comma\"\n\"has \"\"quote\"\"\",\n") != std::string::npos);
  CHECK_THROWS_AS(t.add_row({"one"}), Error);
}

TEST_CASE("text table alignment") {
  Table t({"x", "longer"});
  t.add_row({"12345", "1"});
  const std::string text = t.to_text();
  CHECK(text.rfind("x      longer\n", 0) == 0);
  CHECK(text.find("12345  1") != std::string::npos);
}
