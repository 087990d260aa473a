#pragma once

#include "kitaev/model.hpp"

#include <cstdint>
#include <string>

namespace kitaev::detail {

struct RawEigen {
    CVector values;
    CMatrix vectors;            // unit-norm columns
    bool converged = false;
};

RawEigen solve_standard(const CMatrix& H);
RawEigen solve_extended(const CMatrix& H);

std::uint64_t matrix_hash(const CMatrix& H);
std::string hex(std::uint64_t v);

}  // namespace kitaev::detail
