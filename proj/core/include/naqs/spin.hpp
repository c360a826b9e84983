#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace naqs {

using Spin = int; // +1 or -1

// An ordered sequence of N spins, indexed by network position (the
// autoregressive ordering), not by lattice site.
class SpinConfiguration {
  public:
    SpinConfiguration() = default;
    explicit SpinConfiguration(int n, Spin fill = -1) : spins_(static_cast<std::size_t>(n), fill) {}
    explicit SpinConfiguration(std::vector<Spin> spins) : spins_(std::move(spins)) {
        for (Spin s : spins_)
            if (s != 1 && s != -1) throw std::invalid_argument("spin values must be +1 or -1");
    }

    int size() const { return static_cast<int>(spins_.size()); }
    Spin operator[](int i) const { return spins_[static_cast<std::size_t>(i)]; }
    Spin& operator[](int i) { return spins_[static_cast<std::size_t>(i)]; }

    // total magnetization 2*S_z = sum_i s_i
    int magnetization() const {
        int m = 0;
        for (Spin s : spins_) m += s;
        return m;
    }

    SpinConfiguration flipped() const {
        SpinConfiguration out(*this);
        for (Spin& s : out.spins_) s = -s;
        return out;
    }

    // cyclic shift by k positions: out[i] = in[(i + k) mod N]
    SpinConfiguration shifted(int k) const {
        const int n = size();
        SpinConfiguration out(n);
        for (int i = 0; i < n; ++i) out[i] = spins_[static_cast<std::size_t>((i + k) % n)];
        return out;
    }

    bool operator==(const SpinConfiguration& o) const { return spins_ == o.spins_; }

    auto begin() const { return spins_.begin(); }
    auto end() const { return spins_.end(); }

  private:
    std::vector<Spin> spins_;
};

// Basis index convention: bit j of the index is 1 iff the spin at network
// position j is up (+1). Position 0 is the least significant bit.
inline SpinConfiguration config_from_index(std::uint64_t index, int n) {
    SpinConfiguration sigma(n);
    for (int j = 0; j < n; ++j) sigma[j] = ((index >> j) & 1u) ? +1 : -1;
    return sigma;
}

inline std::uint64_t index_from_config(const SpinConfiguration& sigma) {
    std::uint64_t index = 0;
    for (int j = 0; j < sigma.size(); ++j)
        if (sigma[j] == +1) index |= (1ull << j);
    return index;
}

} // namespace naqs
