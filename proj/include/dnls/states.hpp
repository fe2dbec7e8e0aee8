#ifndef DNLS_STATES_HPP
#define DNLS_STATES_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "lattice.hpp"

namespace dnls {

// Random complex amplitudes on the central `width` sites, rescaled to l2 norm `radius`.
inline LatticeState random_state(std::size_t sites, double radius, std::size_t width, std::uint64_t seed,
                                 BoundaryCondition bc = BoundaryCondition::dirichlet) {
    if (width == 0 || width > sites) throw DomainError("random state support width outside [1, N]");
    if (!(radius >= 0.0)) throw DomainError("random state radius must be nonnegative");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Complex> v(sites);
    const std::size_t first = sites / 2 - width / 2;
    for (std::size_t i = first; i < first + width; ++i) v[i] = {normal(rng), normal(rng)};
    const double norm = l2_norm(v);
    if (norm > 0.0)
        for (auto& z : v) z *= radius / norm;
    return LatticeState(std::move(v), bc);
}

// psi_n = A exp(-n^2 / (2 w^2)) rescaled to l2 norm `radius`.
inline LatticeState gaussian_state(std::size_t sites, double radius, double width,
                                   BoundaryCondition bc = BoundaryCondition::dirichlet) {
    std::vector<Complex> v(sites);
    const long half = static_cast<long>(sites / 2);
    for (std::size_t i = 0; i < sites; ++i) {
        const double n = static_cast<double>(static_cast<long>(i) - half);
        v[i] = std::exp(-n * n / (2.0 * width * width));
    }
    const double norm = l2_norm(v);
    for (auto& z : v) z *= radius / norm;
    return LatticeState(std::move(v), bc);
}

} // namespace dnls

#endif
