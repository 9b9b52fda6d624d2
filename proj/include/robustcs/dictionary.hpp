#pragma once

#include <string>
#include <string_view>

#include "robustcs/types.hpp"

namespace robustcs {

enum class DictionaryKind { identity, dct, daubechies };

struct DictionarySpec {
  DictionaryKind kind = DictionaryKind::identity;
  Index n = 0;
  int wavelet_order = 4;  // vanishing moments (daubechies only)
  int levels = 1;         // decomposition depth (daubechies only)
};

/// Parses "identity", "dct" or "db<order>/<levels>" (e.g. "db10/5").
DictionarySpec parse_dictionary(std::string_view text, Index n);

/// Inverse of parse_dictionary (without n).
std::string dictionary_name(const DictionarySpec& spec);

/// Orthonormal N×N synthesis matrix Ψ̄ (x = Ψ̄θ).
///
/// For daubechies the columns are ordered as: scaling coefficients of the
/// coarsest level, then detail bands from the finest level to the coarsest.
/// Boundaries are handled by periodization, which keeps the matrix exactly
/// orthogonal.
Matrix build_dictionary(const DictionarySpec& spec);

/// Periodized orthogonal DWT and its inverse, in the coefficient ordering of
/// build_dictionary. `x.size()` must be divisible by 2^levels.
Vector wavelet_analysis(const Vector& x, int order, int levels);
Vector wavelet_synthesis(const Vector& coeffs, int order, int levels);

/// Fraction of ‖θ‖² carried by the largest `fraction`·N coefficients (by
/// magnitude) of θ = Ψ̄ᵀx.
double energy_concentration(const Matrix& psi_bar, const Vector& x,
                            double fraction);

}  // namespace robustcs
