#pragma once

// Big-integer bridges shared by the unit suites and the acceptance runner.
// Framework-free: errors throw.

#include <boost/multiprecision/cpp_int.hpp>
#include <stdexcept>

#include "zkimg/field.hpp"

namespace zkimg::test {

using boost::multiprecision::cpp_int;

inline const cpp_int& prime() {
    static const cpp_int p(
        "21888242871839275222246405745257275088548364400416034343698204186575808495617");
    return p;
}

inline cpp_int to_big(const Fe& f) {
    cpp_int v = 0;
    auto limbs = f.canonical();
    for (int i = 3; i >= 0; --i) {
        v <<= 64;
        v += limbs[static_cast<size_t>(i)];
    }
    return v;
}

inline Fe from_big(cpp_int v) {
    v %= prime();
    if (v < 0) v += prime();
    Fe::Limbs limbs{};
    for (size_t i = 0; i < 4; ++i) {
        limbs[i] = static_cast<uint64_t>(v & 0xffffffffffffffffull);
        v >>= 64;
    }
    auto f = Fe::from_canonical(limbs);
    if (!f) throw std::logic_error("from_big produced a non-canonical value");
    return *f;
}

}  // namespace zkimg::test
