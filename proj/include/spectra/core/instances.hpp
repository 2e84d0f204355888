#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spectra/core/model.hpp"

namespace spectra {

enum class Family {
  Elliptope,
  VontopePre,
  VontopePost,
  RandomSlater,
  PlantedNoSlater,
  DualUnattained,
  PaperSd2,
  PaperDualFail,
};

enum class WMode { Random, Rank1, Feasible };

const char* to_string(Family f) noexcept;
const char* to_string(WMode w) noexcept;
/// Accepts the names printed by to_string ("planted-noslater", ...). Throws
/// InvalidArgument otherwise.
Family parse_family(const std::string& s);
WMode parse_wmode(const std::string& s);

struct GeneratorSpec {
  Family family = Family::RandomSlater;
  Index n = 10;
  std::optional<Index> m;  // family default when absent
  std::uint64_t seed = 0;
  int sd = 1;
  int iips = 1;
  int support = 5;
  WMode w_mode = WMode::Random;

  nlohmann::ordered_json to_json() const;
};

BapInstance generate(const GeneratorSpec& spec);

BapInstance gen_elliptope(Index n, WMode w_mode, std::uint64_t seed);
BapInstance gen_vontope(Index n, bool post_fr, WMode w_mode, std::uint64_t seed);
BapInstance gen_random_slater(Index n, Index m, std::uint64_t seed);
BapInstance gen_planted_noslater(Index n, Index m, int sd_target, int iips_target, int support_size,
                                 std::uint64_t seed);
BapInstance gen_dual_unattained(Index n, std::uint64_t seed);
BapInstance fixture_paper_sd2();
BapInstance fixture_paper_dual_fail();

/// Vontope helpers, exposed for tests.
namespace vontope {

/// Position of X(a, i) inside the lifted variable (index 0 is the constant).
constexpr Index var(Index n, Index a, Index i) noexcept { return 1 + i * n + a; }
/// The gangster index set J as (p, q) pairs with p <= q, (0,0) first.
std::vector<std::pair<Index, Index>> gangster_set(Index n);
/// Entries of J dropped after FR because they are implied by the rest.
std::vector<std::pair<Index, Index>> dependent_after_fr(Index n);
/// Orthonormal basis of null([-e, H]), H = [e^T (x) I; I (x) e^T].
Matrix face_basis(Index n);
/// [1; vec(X)][1; vec(X)]^T for a permutation given as perm[i] = row of the 1 in column i.
Matrix lifted_vertex(const std::vector<Index>& perm);
/// Average of all lifted permutation vertices.
Matrix barycenter(Index n);

}  // namespace vontope

}  // namespace spectra
