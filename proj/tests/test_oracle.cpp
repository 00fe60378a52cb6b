#include <doctest.h>

#include <sstream>

#include "editnts/errors.hpp"
#include "editnts/executor.hpp"
#include "editnts/oracle.hpp"
#include "helpers.hpp"
#include "reference.hpp"

using namespace editnts;
using testing::toks;

namespace {

EditProgram prog(std::string_view text) { return parse_program(text); }

}  // namespace

TEST_CASE("labels print and parse") {
  CHECK(EditLabel::add("pay").to_string() == "ADD|pay");
  CHECK(EditLabel::parse("ADD|a|b").word() == "a|b");
  CHECK(EditLabel::parse("KEEP") == EditLabel::keep());
  CHECK_THROWS_AS(EditLabel::parse("ADD|"), DataError);
  CHECK_THROWS_AS(EditLabel::parse("keep"), DataError);
  CHECK(format_program(prog("KEEP KEEP ADD|pay DEL STOP")) == "KEEP KEEP ADD|pay DEL STOP");
}

TEST_CASE("program files report the bad line") {
  std::istringstream in("KEEP STOP\nDEL STOP\nKEEP BOGUS STOP\n");
  try {
    read_programs(in);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("golden example from the combat sentence") {
  const auto x = toks("the line between combat is getting blurry");
  const auto y = toks("war is changing");
  const auto z = construct_program(x, y);
  CHECK(format_program(z) == "ADD|war DEL DEL DEL DEL KEEP ADD|changing DEL DEL STOP");
  CHECK(execute(x, z) == y);
}

TEST_CASE("small cases") {
  CHECK(construct_program(toks("a b"), toks("a b")) == prog("KEEP KEEP STOP"));
  CHECK(construct_program(toks("a b"), toks("b a")) == prog("ADD|b KEEP DEL STOP"));
  CHECK(construct_program(toks("a b c"), toks("a c")) == prog("KEEP DEL KEEP STOP"));
  CHECK(construct_program(toks("a"), toks("b")) == prog("ADD|b DEL STOP"));
  CHECK(construct_program(toks("a"), {}) == prog("DEL STOP"));
  CHECK(construct_program({}, toks("a")) == prog("ADD|a STOP"));
  CHECK(construct_program(Tokens{}, Tokens{}) == prog("STOP"));
}

TEST_CASE("delete-first tie break is a different shortest path") {
  const auto x = toks("a");
  const auto y = toks("b");
  const auto z = construct_program(x, y, TieBreak::kDeleteFirst);
  CHECK(z == prog("DEL ADD|b STOP"));
  CHECK(execute(x, z) == y);
}

TEST_CASE("random pairs: round trip, minimality, canonical order, determinism") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t alphabet = 2 + rng() % 10;
    const auto x = reference::random_tokens(rng, 1, 12, alphabet);
    const auto y = reference::random_tokens(rng, 1, 12, alphabet);
    const auto z = construct_program(x, y);
    const auto out = reference::interpret(x, z);
    REQUIRE(out.has_value());
    CHECK(*out == y);
    const auto c = count_kinds(z);
    CHECK(c[EditKind::kAdd] + c[EditKind::kDelete] ==
          x.size() + y.size() - 2 * reference::lcs_length(x, y));
    CHECK(c[EditKind::kStop] == 1);
    CHECK(z.back() == EditLabel::stop());
    CHECK(reference::adds_before_deletes(z));
    CHECK(construct_program(x, y) == z);
  }
}

TEST_CASE("brute force agrees on short sequences") {
  const auto seqs = reference::all_sequences(0, 3, {"a", "b", "c"});
  for (const auto& x : seqs) {
    for (const auto& y : seqs) {
      auto expected = reference::brute_force_canonical(x, y);
      REQUIRE(expected.has_value());
      CHECK(construct_program(x, y) == *expected);
    }
  }
}

TEST_CASE("label statistics") {
  SUBCASE("zero-count kinds take the largest weight") {
    std::vector<EditProgram> ps{prog("KEEP STOP")};
    auto s = label_statistics(ps);
    CHECK(s.counts[EditKind::kKeep] == 1);
    CHECK(s.counts[EditKind::kStop] == 1);
    CHECK(s.counts[EditKind::kAdd] == 0);
    CHECK(s.weight(EditKind::kAdd) == doctest::Approx(s.weight(EditKind::kKeep)));
    CHECK(s.weight(EditKind::kDelete) == doctest::Approx(s.weight(EditKind::kKeep)));
  }
  SUBCASE("rarer kinds weigh more, mean is one") {
    std::vector<EditProgram> ps{prog("ADD|a STOP"), prog("DEL DEL STOP")};
    auto s = label_statistics(ps);
    CHECK(s.weight(EditKind::kAdd) > s.weight(EditKind::kDelete));
    // ADD 1, DEL 2, STOP 2, KEEP 0 of 5: inverse 5, 2.5, 2.5 and KEEP gets 5.
    const double mean = (5 + 2.5 + 2.5 + 5) / 4;
    CHECK(s.weight(EditKind::kAdd) == doctest::Approx(5 / mean));
    CHECK(s.weight(EditKind::kDelete) == doctest::Approx(2.5 / mean));
    CHECK(s.weight(EditKind::kKeep) == doctest::Approx(5 / mean));
    double sum = 0;
    for (auto w : s.weights) sum += w;
    CHECK(sum / 4 == doctest::Approx(1.0));
  }
  SUBCASE("duplicating the corpus keeps the weights") {
    std::vector<EditProgram> ps{prog("ADD|a KEEP STOP"), prog("DEL KEEP KEEP STOP")};
    auto once = label_statistics(ps);
    const auto copy = ps;
    ps.insert(ps.end(), copy.begin(), copy.end());
    auto twice = label_statistics(ps);
    for (std::size_t k = 0; k < kNumEditKinds; ++k) {
      CHECK(twice.weights[k] == doctest::Approx(once.weights[k]));
      CHECK(twice.counts.n[k] == 2 * once.counts.n[k]);
    }
  }
  SUBCASE("scaling") {
    std::vector<EditProgram> ps{prog("ADD|a KEEP DEL STOP")};
    auto s = label_statistics(ps).scaled(10, 1, 1);
    CHECK(s.weight(EditKind::kAdd) == doctest::Approx(10 * s.weight(EditKind::kKeep)));
    CHECK_THROWS_AS(label_statistics(ps).scaled(0, 1, 1), std::invalid_argument);
  }
  CHECK_THROWS_AS(label_statistics(std::span<const EditProgram>{}), std::invalid_argument);
}
