#include "cforge/modes.hpp"

#include <algorithm>
#include <cstdlib>

namespace cforge {

std::vector<int> Mode::label() const {
    std::vector<int> out{static_cast<int>(part)};
    out.insert(out.end(), k.begin(), k.end());
    return out;
}

Mode Mode::from_label(const std::vector<int>& label) {
    Mode m;
    if (label.empty()) return m;
    m.part = static_cast<Part>(label[0]);
    m.k.assign(label.begin() + 1, label.end());
    return m;
}

int Mode::max_abs() const {
    int m = 0;
    for (int x : k) m = std::max(m, std::abs(x));
    return m;
}

std::vector<std::vector<int>> half_space_vectors(int cutoff, int dim) {
    std::vector<std::vector<int>> out;
    std::vector<int> k(static_cast<std::size_t>(dim), -cutoff);
    while (true) {
        auto first = std::find_if(k.begin(), k.end(), [](int x) { return x != 0; });
        if (first != k.end() && *first > 0) out.push_back(k);
        std::size_t i = k.size();
        while (i > 0) {
            --i;
            if (k[i] < cutoff) {
                ++k[i];
                break;
            }
            k[i] = -cutoff;
            if (i == 0) return out;
        }
        if (k.empty()) return out;
    }
}

std::vector<Mode> enumerate_modes(int cutoff, int dim) {
    std::vector<Mode> out;
    out.push_back({Mode::Zero, std::vector<int>(static_cast<std::size_t>(dim), 0)});
    for (const auto& k : half_space_vectors(cutoff, dim)) {
        out.push_back({Mode::Cos, k});
        out.push_back({Mode::Sin, k});
    }
    return out;
}

std::string mode_variable_name(const std::string& field, const Mode& mode) {
    if (mode.part == Mode::Zero) return field + "z";
    std::string s = field + (mode.part == Mode::Cos ? "c" : "s");
    for (int x : mode.k) {
        if (x == 0)
            s += "z";
        else
            s += (x > 0 ? "p" : "m") + std::to_string(std::abs(x));
    }
    return s;
}

}  // namespace cforge
