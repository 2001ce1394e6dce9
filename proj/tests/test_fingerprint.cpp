#include <doctest.h>

#include <numeric>

#include "moltx/fingerprint.hpp"
#include "moltx/gradcheck.hpp"
#include "oracles.hpp"

using namespace moltx;

namespace {

std::uint64_t total(const FingerprintVector& fp) {
  std::uint64_t t = 0;
  for (auto c : fp.counts) t += c;
  return t;
}

}  // namespace

TEST_CASE("radius 0 emits one identifier per atom") {
  CHECK(total(morgan_count(parse_smiles("CCO"), 0, 2048)) == 3);
  CHECK(total(morgan_count(parse_smiles("C"), 0, 64)) == 1);
}

TEST_CASE("benzene radius 2: 6 atoms x 3 rounds identifiers") {
  const auto fp = morgan_count(parse_smiles("c1ccccc1"), 2, 2048);
  CHECK(total(fp) == 18);
  // All atoms are symmetric: at most one distinct identifier per round.
  const auto bin = morgan_binary(parse_smiles("c1ccccc1"), 2, 2048);
  CHECK(total(bin) <= 3);
}

TEST_CASE("binary is the clamped count vector") {
  const auto g = parse_smiles("CC(=O)NC1=CC=CC=C1");
  const auto count = morgan_count(g, 2, 512);
  const auto bin = morgan_binary(g, 2, 512);
  for (std::size_t i = 0; i < count.counts.size(); ++i) {
    CHECK(bin.counts[i] <= count.counts[i]);
    CHECK(bin.counts[i] == (count.counts[i] > 0 ? 1u : 0u));
  }
}

TEST_CASE("atom-order invariance of the count fingerprint") {
  Rng rng(555);
  for (int trial = 0; trial < 40; ++trial) {
    MolecularGraph g = random_test_graph(rng, 2, 9);
    const auto perm = oracle::random_permutation(g.num_atoms(), rng);
    MolecularGraph h = oracle::permute_graph(g, perm);
    CHECK(morgan_count(g, 2, 256).counts == morgan_count(h, 2, 256).counts);
  }
}

TEST_CASE("folding preserves total count") {
  const auto g = parse_smiles("CC(Br)C1=CC(=O)C=CC1");
  const auto a = morgan_count(g, 3, 2048);
  const auto b = morgan_count(g, 3, 64);
  const auto c = morgan_count(g, 3, 7);  // non-power-of-two also folds
  CHECK(total(a) == total(b));
  CHECK(total(b) == total(c));
}

TEST_CASE("tanimoto examples and properties") {
  FingerprintVector x{{1, 2, 0}, 2, 3};
  FingerprintVector y{{1, 1, 1}, 2, 3};
  CHECK(tanimoto(x, y) == doctest::Approx(0.5));
  CHECK(tanimoto(x, x) == 1.0);

  FingerprintVector z{{0, 0, 3}, 2, 3};
  FingerprintVector w{{2, 1, 0}, 2, 3};
  CHECK(tanimoto(z, w) == 0.0);

  FingerprintVector empty1{{0, 0}, 2, 2}, empty2{{0, 0}, 2, 2};
  CHECK(tanimoto(empty1, empty2) == 1.0);

  FingerprintVector other_dim{{1, 1, 1, 1}, 2, 4};
  CHECK_THROWS_AS(tanimoto(x, other_dim), DimensionMismatch);

  Rng rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    FingerprintVector a{{}, 2, 16}, b{{}, 2, 16};
    for (int i = 0; i < 16; ++i) {
      a.counts.push_back(static_cast<std::uint32_t>(rng.uniform(5)));
      b.counts.push_back(static_cast<std::uint32_t>(rng.uniform(5)));
    }
    const double ab = tanimoto(a, b);
    CHECK(ab == tanimoto(b, a));
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
  }
}

TEST_CASE("mean_cross_similarity") {
  const MolecularGraph g = parse_smiles("CCO");
  CHECK(mean_cross_similarity({g}, {g}) == doctest::Approx(1.0));

  const MolecularGraph h = parse_smiles("CCN");
  CHECK(mean_cross_similarity({g}, {h}) ==
        doctest::Approx(tanimoto(morgan_count(g, 3, 2048),
                                 morgan_count(h, 3, 2048))));

  // 2x2 brute force.
  const MolecularGraph a1 = parse_smiles("CCO"), a2 = parse_smiles("CCC");
  const MolecularGraph b1 = parse_smiles("CCN"), b2 = parse_smiles("c1ccccc1");
  auto fp = [](const MolecularGraph& g) { return morgan_count(g, 3, 2048); };
  const double expect = (tanimoto(fp(a1), fp(b1)) + tanimoto(fp(a1), fp(b2)) +
                         tanimoto(fp(a2), fp(b1)) + tanimoto(fp(a2), fp(b2))) /
                        4.0;
  CHECK(mean_cross_similarity({a1, a2}, {b1, b2}) == doctest::Approx(expect));

  CHECK_THROWS_AS(mean_cross_similarity({}, {g}), EmptySet);
}

TEST_CASE("graph_key is isomorphism-stable") {
  Rng rng(321);
  for (int trial = 0; trial < 25; ++trial) {
    MolecularGraph g = random_test_graph(rng, 2, 8);
    MolecularGraph h =
        oracle::permute_graph(g, oracle::random_permutation(g.num_atoms(), rng));
    CHECK(graph_key(g) == graph_key(h));
  }
  CHECK(graph_key(parse_smiles("CCO")) != graph_key(parse_smiles("CCN")));
}
