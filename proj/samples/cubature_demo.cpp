// Integrates the hat function over [0,1)^2 with the Frolov rule at a few
// scales and prints the error next to n^-2 log n.

#include <cmath>
#include <cstdio>

#include "frolov/frolov.hpp"

int main() {
  using namespace frolov;
  auto const f = make_hat(2);
  auto const poly = build_polynomial({2, generator_kind::standard, {}});
  std::printf("%10s %10s %24s %12s %12s\n", "n", "nodes", "Q_n(f)", "error", "n^-2 log n");
  for (double n = 256; n <= 65536; n *= 4) {
    auto const r = integrate(assemble_lattice(poly, n), f);
    std::printf("%10.0f %10llu %24.17g %12.3e %12.3e\n", n, static_cast<unsigned long long>(r.point_count), r.value,
                r.abs_error, std::log(n) / (n * n));
  }
}
