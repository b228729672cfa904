#include "catch_amalgamated.hpp"

#include "sbpfdtd/reference.hpp"
#include "sbpfdtd/sat.hpp"
#include "sbpfdtd/verify.hpp"

using namespace sbpfdtd;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

// Neutral coefficient per face and slot for a closed (PEC or PMC) wall.
const std::array<std::array<double, 2>, 6> closed_table{{{-1, 1}, {1, -1}, {1, -1}, {-1, 1}, {-1, 1}, {1, -1}}};

double dense_residual(const GridSpec& g, const SatConfig& s) {
  return energy_rate_residual(assemble_reference(g, verification_materials(g), s));
}

} // namespace

TEST_CASE("PEC coefficients", "[sat]") {
  const auto s = SatConfig::uniform(BoundaryType::PEC);
  for (Face f : all_faces)
    for (int slot = 0; slot < 2; ++slot) {
      REQUIRE(s.sigma_at(f, slot) == closed_table[static_cast<int>(f)][slot]);
      REQUIRE(s.chi_at(f, slot) == 0.0);
    }
}

TEST_CASE("PMC coefficients", "[sat]") {
  const auto s = SatConfig::uniform(BoundaryType::PMC);
  for (Face f : all_faces)
    for (int slot = 0; slot < 2; ++slot) {
      REQUIRE(s.chi_at(f, slot) == closed_table[static_cast<int>(f)][slot]);
      REQUIRE(s.sigma_at(f, slot) == 0.0);
    }
}

TEST_CASE("periodic coefficients are halved on both fields", "[sat]") {
  const auto s = SatConfig::uniform(BoundaryType::Periodic, {0.1, 0.2, 0.3});
  for (Face f : all_faces)
    for (int slot = 0; slot < 2; ++slot) {
      REQUIRE(s.sigma_at(f, slot) == 0.5 * closed_table[static_cast<int>(f)][slot]);
      REQUIRE(s.chi_at(f, slot) == 0.5 * closed_table[static_cast<int>(f)][slot]);
    }
  REQUIRE(s.needs_complex());
  REQUIRE_FALSE(SatConfig::uniform(BoundaryType::Periodic).needs_complex());
  REQUIRE_FALSE(SatConfig::uniform(BoundaryType::PEC, {0.1, 0.2, 0.3}).needs_complex());
}

TEST_CASE("coefficient bracket vanishes for neutral sets", "[sat]") {
  for (BoundaryType b : {BoundaryType::PEC, BoundaryType::PMC, BoundaryType::Periodic})
    REQUIRE(SatConfig::uniform(b).energy_rate_residual() == 0.0);
  auto s = SatConfig::uniform(BoundaryType::PEC);
  s.sigma_at(Face::YHigh, 1) *= -1.0;
  REQUIRE(s.energy_rate_residual() == 2.0);
}

TEST_CASE("assembled operator is energy neutral for every boundary set", "[sat][property]") {
  for (const GridSpec& g : {GridSpec::cubic(4, 0.1), GridSpec{{4, 5, 6}, {0.1, 0.07, 0.05}}}) {
    for (BoundaryType b : {BoundaryType::PEC, BoundaryType::PMC, BoundaryType::Periodic})
      REQUIRE(dense_residual(g, verification_sat(b)) <= 1e-12);
    // Mixed walls: PEC in x, PMC in y, Bloch-periodic in z.
    const auto mixed = SatConfig::make({BoundaryType::PEC, BoundaryType::PEC, BoundaryType::PMC, BoundaryType::PMC,
                                        BoundaryType::Periodic, BoundaryType::Periodic},
                                       {0.0, 0.0, 0.8});
    REQUIRE(dense_residual(g, mixed) <= 1e-12);
  }
}

TEST_CASE("flipping any single coefficient breaks neutrality", "[sat][property]") {
  const GridSpec g = GridSpec::cubic(4, 0.1);
  for (BoundaryType b : {BoundaryType::PEC, BoundaryType::PMC, BoundaryType::Periodic}) {
    const SatConfig base = verification_sat(b);
    for (Face f : all_faces)
      for (int slot = 0; slot < 2; ++slot)
        for (int which = 0; which < 2; ++which) {
          SatConfig s = base;
          double& c = which == 0 ? s.sigma_at(f, slot) : s.chi_at(f, slot);
          if (c == 0.0) continue;
          c = -c;
          INFO(boundary_name(b) << " " << face_name(f) << " slot " << slot << (which == 0 ? " sigma" : " chi"));
          REQUIRE(dense_residual(g, s) > 1e-3);
        }
  }
}

TEST_CASE("boundary validation", "[sat]") {
  auto one_sided = SatConfig::make({BoundaryType::Periodic, BoundaryType::PEC, BoundaryType::PEC, BoundaryType::PEC,
                                    BoundaryType::PEC, BoundaryType::PEC});
  REQUIRE_THROWS_WITH(one_sided.validate(ScalarMode::Real), ContainsSubstring("needs both opposing faces periodic"));
  const auto bloch = SatConfig::uniform(BoundaryType::Periodic, {0.5, 0.0, 0.0});
  REQUIRE_THROWS_WITH(bloch.validate(ScalarMode::Real), ContainsSubstring("requires complex fields"));
  REQUIRE_NOTHROW(bloch.validate(ScalarMode::Complex));
  auto pec = SatConfig::uniform(BoundaryType::PEC);
  pec.chi_at(Face::ZLow, 0) = 1.0;
  REQUIRE_THROWS_WITH(pec.validate(ScalarMode::Real), ContainsSubstring("PEC face z_low cannot carry a chi penalty"));
  REQUIRE(parse_boundary("pmc") == BoundaryType::PMC);
  REQUIRE_THROWS_AS(parse_boundary("abc"), ConfigError);
}

TEST_CASE("Bloch factor conjugates between opposite faces", "[sat]") {
  const auto s = SatConfig::uniform(BoundaryType::Periodic, {0.3, -0.7, 1.1});
  const auto hi = bloch_factor<std::complex<double>>(s, Face::XHigh);
  const auto lo = bloch_factor<std::complex<double>>(s, Face::XLow);
  REQUIRE_THAT(hi.real(), WithinAbs(std::cos(0.3), 1e-15));
  REQUIRE_THAT(hi.imag(), WithinAbs(-std::sin(0.3), 1e-15));
  REQUIRE_THAT(std::abs(hi * lo - 1.0), WithinAbs(0.0, 1e-15));
  REQUIRE_THAT(bloch_factor<std::complex<double>>(s, Face::ZHigh).imag(), WithinAbs(-std::sin(1.1), 1e-15));
  REQUIRE(bloch_factor<double>(s, Face::YHigh) == 1.0);
}
