#pragma once

#include "hankelid/identify.hpp"

#include <string>

namespace hankelid {

/// Columns i,j,k,value with one-based indices.
std::string impulse_csv(const ImpulseResponse& h);
std::string ident_trace_json(const IdentResult& result);
/// Selected order, lambda, spline hyper-parameters, noise variances and time.
std::string ident_summary(const IdentResult& result);

}  // namespace hankelid
