#include <doctest.h>

#include "oracles.hpp"
#include "qbnn/qubo.hpp"
#include "qbnn/qubo_io.hpp"
#include "qbnn/rng.hpp"

using namespace qbnn;

namespace {

struct Pair {
  Qubo q;
  oracle::Dense d;
};

Pair random_form(Rng& rng, std::size_t n, std::size_t terms) {
  Pair p{Qubo(n), oracle::Dense(n)};
  const auto off = static_cast<std::int64_t>(rng.below(21)) - 10;
  p.q.set_offset(off);
  p.d.offset = off;
  for (std::size_t t = 0; t < terms; ++t) {
    const std::size_t i = rng.below(n), j = rng.below(n);
    const auto c = static_cast<std::int64_t>(rng.below(41)) - 20;
    p.q.add_term(i, j, c);
    p.d.add(i, j, c);
  }
  return p;
}

Assignment random_bits(Rng& rng, std::size_t n) {
  Assignment a(n);
  for (auto& b : a) b = static_cast<Bit>(rng.below(2));
  return a;
}

}  // namespace

TEST_CASE("terms accumulate on the canonical pair and cancel away") {
  Qubo q(3);
  q.add_term(2, 0, 5);
  q.add_term(0, 2, -2);
  CHECK(q.coefficient(0, 2) == 3);
  CHECK(q.coefficient(2, 0) == 3);
  q.add_term(0, 2, -3);
  CHECK(q.num_terms() == 0);
  q.add_term(1, 1, 4);
  CHECK(q.linear(1) == 4);
  CHECK(q.terms() == std::vector<Qubo::Term>{{1, 1, 4}});
}

TEST_CASE("hand-computed energy") {
  // E = 1 + 2 q0 - 3 q1 + 4 q0 q1
  Qubo q(2, 1);
  q.add_linear(0, 2);
  q.add_linear(1, -3);
  q.add_term(0, 1, 4);
  const Assignment b00{0, 0}, b10{1, 0}, b01{0, 1}, b11{1, 1};
  CHECK(q.energy(b00) == 1);
  CHECK(q.energy(b10) == 3);
  CHECK(q.energy(b01) == -2);
  CHECK(q.energy(b11) == 4);
}

TEST_CASE("dimension errors") {
  Qubo q(2);
  CHECK_THROWS_AS(q.add_term(0, 2, 1), DimensionError);
  CHECK_THROWS_AS(q.energy(Assignment{1}), DimensionError);
  CHECK_THROWS_AS(q.flip_delta(Assignment{1, 0}, 5), DimensionError);
  Qubo big(3);
  CHECK_THROWS_AS(q.add(big), DimensionError);
}

TEST_CASE("energy agrees with a dense reference on random forms") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(12);
    const Pair p = random_form(rng, n, rng.below(40));
    const Assignment a = random_bits(rng, n);
    REQUIRE(p.q.energy(a) == p.d.energy(a));
    const CompiledQubo<std::int64_t> c(p.q);
    REQUIRE(c.energy(a) == p.d.energy(a));
  }
}

TEST_CASE("flip delta equals the energy difference") {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(10);
    const Pair p = random_form(rng, n, rng.below(30));
    Assignment a = random_bits(rng, n);
    const CompiledQubo<std::int64_t> c(p.q);
    auto field = c.fields(a);
    std::int64_t e = c.energy(a);
    for (int step = 0; step < 20; ++step) {
      const std::size_t k = rng.below(n);
      Assignment b = a;
      b[k] ^= 1;
      REQUIRE(p.q.flip_delta(a, k) == p.d.energy(b) - p.d.energy(a));
      e += c.apply_flip(a, field, k);
      REQUIRE(e == p.d.energy(a));
    }
  }
}

TEST_CASE("adding forms is term-wise") {
  Rng rng(13);
  const Pair a = random_form(rng, 6, 15), b = random_form(rng, 4, 10);
  Qubo sum = a.q;
  sum.add(b.q);
  for (int t = 0; t < 30; ++t) {
    const Assignment x = random_bits(rng, 6);
    const Assignment head(x.begin(), x.begin() + 4);
    CHECK(sum.energy(x) == a.q.energy(x) + b.q.energy(head));
  }
}

TEST_CASE("max_abs_coefficient") {
  Qubo q(3);
  q.add_term(0, 1, -9);
  q.add_linear(2, 4);
  CHECK(q.max_abs_coefficient() == 9);
}

TEST_CASE("JSON and text round trips preserve the form") {
  Rng rng(14);
  for (int trial = 0; trial < 50; ++trial) {
    const Pair p = random_form(rng, 1 + rng.below(15), rng.below(50));
    std::vector<std::string> names;
    for (std::size_t i = 0; i < p.q.num_vars(); ++i) names.push_back("v" + std::to_string(i));
    const NamedQubo back = parse_qubo_json(serialize_qubo(p.q, names));
    REQUIRE(back.qubo == p.q);
    REQUIRE(back.var_names == names);
    REQUIRE(parse_qubo_text(serialize_qubo_text(p.q)) == p.q);
    REQUIRE(parse_qubo_any(serialize_qubo_text(p.q)).qubo == p.q);
    REQUIRE(parse_qubo_any(serialize_qubo(p.q)).qubo == p.q);
  }
}

TEST_CASE("serialization is canonical") {
  Qubo a(3), b(3);
  a.add_term(0, 2, 1);
  a.add_term(1, 1, 2);
  b.add_term(1, 1, 2);
  b.add_term(2, 0, 1);
  CHECK(serialize_qubo(a) == serialize_qubo(b));
  CHECK(serialize_qubo_text(a) == "qubo 3 2 0\n0 2 1\n1 1 2\n");
}

TEST_CASE("malformed JSON names the offending field") {
  auto msg = [](const std::string& text) {
    try {
      parse_qubo_json(text);
    } catch (const ParseError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(msg(R"({"num_vars": 2, "offset": 0, "terms": [[0, 5, 1]]})").find("terms[0]") != std::string::npos);
  CHECK(msg(R"({"offset": 0, "terms": []})").find("num_vars") != std::string::npos);
  CHECK(msg(R"({"num_vars": 2, "terms": [[0, 1]]})").find("terms[0]") != std::string::npos);
  CHECK(msg(R"({"num_vars": 2, "terms": [], "var_names": ["a"]})").find("var_names") != std::string::npos);
  CHECK(msg("{not json").find("invalid JSON") != std::string::npos);
}

TEST_CASE("malformed text reports the line") {
  auto line_of = [](const std::string& text) -> std::size_t {
    try {
      parse_qubo_text(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(line_of("# c\nqubo 2 1 0\n0 x 1\n") == 3);
  CHECK(line_of("qubo 2 1 0\n0 2 1\n") == 2);
  CHECK(line_of("0 1 1\n") == 1);
  CHECK_THROWS_AS(parse_qubo_text("qubo 2 2 0\n0 1 1\n"), ParseError);
}
