#pragma once

#include <string>
#include <vector>

namespace cforge {

// One real Fourier mode on a periodic box: the zero mode, or the cosine/sine
// part of a wave vector from the half space (first nonzero component > 0).
struct Mode {
    enum Part { Zero = 0, Cos = 1, Sin = 2 };
    Part part = Zero;
    std::vector<int> k;

    // Encoding stored in the variable table: {part, k...}.
    std::vector<int> label() const;
    static Mode from_label(const std::vector<int>& label);
    int max_abs() const;
};

// Zero mode first, then wave vectors with max-norm <= cutoff in lexicographic
// order, cosine part before sine part.
std::vector<Mode> enumerate_modes(int cutoff, int dim);
std::vector<std::vector<int>> half_space_vectors(int cutoff, int dim);

// Field name plus a mode code: A0z, A1cp1zm1 (k = (1, 0, -1), cosine), ...
std::string mode_variable_name(const std::string& field, const Mode& mode);

}  // namespace cforge
