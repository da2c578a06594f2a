#include "mllab/rng.hpp"

#include <cmath>

namespace mllab {

double RandomStream::exponential() { return -std::log(uniform_open()); }

}  // namespace mllab
