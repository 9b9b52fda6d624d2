#include "robustcs/dictionary.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <string>

#include "daubechies_filters.hpp"

namespace robustcs {
namespace {

std::span<const double> scaling_filter(int order) {
  using namespace detail;
  switch (order) {
    case 1: return kDb1;
    case 2: return kDb2;
    case 3: return kDb3;
    case 4: return kDb4;
    case 5: return kDb5;
    case 6: return kDb6;
    case 7: return kDb7;
    case 8: return kDb8;
    case 9: return kDb9;
    case 10: return kDb10;
    default:
      throw InvalidArgument("daubechies order must be in [1, 10], got " +
                            std::to_string(order));
  }
}

void check_levels(Index n, int levels) {
  if (levels < 1) throw InvalidArgument("daubechies levels must be >= 1");
  if (levels >= 62 || n % (Index{1} << levels) != 0)
    throw InvalidArgument("daubechies: n = " + std::to_string(n) +
                          " is not divisible by 2^" + std::to_string(levels));
}

// One periodized analysis step on x[0..len): low-pass into lo, high-pass into hi.
void analysis_step(const double* x, Index len, std::span<const double> h,
                   double* lo, double* hi) {
  const Index taps = static_cast<Index>(h.size());
  for (Index k = 0; k < len / 2; ++k) {
    double a = 0.0, d = 0.0;
    for (Index j = 0; j < taps; ++j) {
      const double s = x[(2 * k + j) % len];
      const double g = (j % 2 == 0 ? 1.0 : -1.0) * h[static_cast<std::size_t>(taps - 1 - j)];
      a += h[static_cast<std::size_t>(j)] * s;
      d += g * s;
    }
    lo[k] = a;
    hi[k] = d;
  }
}

// Adjoint (= inverse) of analysis_step.
void synthesis_step(const double* lo, const double* hi, Index len,
                    std::span<const double> h, double* x) {
  const Index taps = static_cast<Index>(h.size());
  std::fill(x, x + len, 0.0);
  for (Index k = 0; k < len / 2; ++k) {
    for (Index j = 0; j < taps; ++j) {
      const double g = (j % 2 == 0 ? 1.0 : -1.0) * h[static_cast<std::size_t>(taps - 1 - j)];
      x[(2 * k + j) % len] += h[static_cast<std::size_t>(j)] * lo[k] + g * hi[k];
    }
  }
}

// Offset of the detail band of `level` (1 = finest) in the coefficient vector.
Index detail_offset(Index n, int levels, int level) {
  Index off = n >> levels;
  for (int l = 1; l < level; ++l) off += n >> l;
  return off;
}

}  // namespace

DictionarySpec parse_dictionary(std::string_view text, Index n) {
  DictionarySpec spec;
  spec.n = n;
  if (text == "identity") {
    spec.kind = DictionaryKind::identity;
    return spec;
  }
  if (text == "dct") {
    spec.kind = DictionaryKind::dct;
    return spec;
  }
  if (text.starts_with("db")) {
    const auto slash = text.find('/');
    if (slash == std::string_view::npos)
      throw InvalidArgument("dictionary '" + std::string(text) + "': expected db<order>/<levels>");
    const auto order_txt = text.substr(2, slash - 2);
    const auto level_txt = text.substr(slash + 1);
    auto parse_int = [&](std::string_view s, int& out) {
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
      if (ec != std::errc{} || ptr != s.data() + s.size())
        throw InvalidArgument("dictionary '" + std::string(text) + "': bad integer");
    };
    spec.kind = DictionaryKind::daubechies;
    parse_int(order_txt, spec.wavelet_order);
    parse_int(level_txt, spec.levels);
    if (spec.wavelet_order < 1 || spec.wavelet_order > 10)
      throw InvalidArgument("dictionary '" + std::string(text) + "': order must be in [1, 10]");
    if (spec.levels < 1)
      throw InvalidArgument("dictionary '" + std::string(text) + "': levels must be >= 1");
    return spec;
  }
  throw InvalidArgument("unknown dictionary '" + std::string(text) + "'");
}

std::string dictionary_name(const DictionarySpec& spec) {
  switch (spec.kind) {
    case DictionaryKind::identity:
      return "identity";
    case DictionaryKind::dct:
      return "dct";
    case DictionaryKind::daubechies:
      return "db" + std::to_string(spec.wavelet_order) + "/" + std::to_string(spec.levels);
  }
  return "unknown";
}

Vector wavelet_analysis(const Vector& x, int order, int levels) {
  const auto h = scaling_filter(order);
  const Index n = x.size();
  check_levels(n, levels);
  Vector out(n);
  Vector approx = x;
  Vector lo(n), hi(n);
  for (int level = 1; level <= levels; ++level) {
    const Index len = n >> (level - 1);
    analysis_step(approx.data(), len, h, lo.data(), hi.data());
    out.segment(detail_offset(n, levels, level), len / 2) = hi.head(len / 2);
    approx.head(len / 2) = lo.head(len / 2);
  }
  out.head(n >> levels) = approx.head(n >> levels);
  return out;
}

Vector wavelet_synthesis(const Vector& coeffs, int order, int levels) {
  const auto h = scaling_filter(order);
  const Index n = coeffs.size();
  check_levels(n, levels);
  Vector approx = Vector::Zero(n);
  approx.head(n >> levels) = coeffs.head(n >> levels);
  Vector next(n);
  for (int level = levels; level >= 1; --level) {
    const Index len = n >> (level - 1);
    synthesis_step(approx.data(), coeffs.data() + detail_offset(n, levels, level),
                   len, h, next.data());
    approx.head(len) = next.head(len);
  }
  return approx;
}

Matrix build_dictionary(const DictionarySpec& spec) {
  const Index n = spec.n;
  if (n <= 0) throw InvalidArgument("build_dictionary: n must be positive");
  switch (spec.kind) {
    case DictionaryKind::identity:
      return Matrix::Identity(n, n);
    case DictionaryKind::dct: {
      Matrix psi(n, n);
      const double pi = std::numbers::pi;
      for (Index k = 0; k < n; ++k) {
        const double c = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
        for (Index i = 0; i < n; ++i)
          psi(i, k) = c * std::cos(pi * (2.0 * i + 1.0) * k / (2.0 * n));
      }
      return psi;
    }
    case DictionaryKind::daubechies: {
      scaling_filter(spec.wavelet_order);
      check_levels(n, spec.levels);
      Matrix psi(n, n);
      Vector unit = Vector::Zero(n);
      for (Index j = 0; j < n; ++j) {
        unit(j) = 1.0;
        psi.col(j) = wavelet_synthesis(unit, spec.wavelet_order, spec.levels);
        unit(j) = 0.0;
      }
      return psi;
    }
  }
  throw InvalidArgument("build_dictionary: unknown kind");
}

double energy_concentration(const Matrix& psi_bar, const Vector& x,
                            double fraction) {
  if (psi_bar.rows() != x.size())
    throw InvalidArgument("energy_concentration: dimension mismatch");
  Vector theta = psi_bar.transpose() * x;
  std::vector<double> sq(static_cast<std::size_t>(theta.size()));
  for (Index i = 0; i < theta.size(); ++i) sq[static_cast<std::size_t>(i)] = theta(i) * theta(i);
  std::sort(sq.begin(), sq.end(), std::greater<>());
  const double total = theta.squaredNorm();
  if (total == 0.0) return 1.0;
  const auto keep = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(sq.size())));
  double top = 0.0;
  for (std::size_t i = 0; i < std::min(keep, sq.size()); ++i) top += sq[i];
  return top / total;
}

}  // namespace robustcs
