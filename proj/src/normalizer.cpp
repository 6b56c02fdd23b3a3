#include "tse/normalizer.hpp"

namespace tse {

Normalizer Normalizer::from(const Grid& grid, const FdParams& p) {
    return Normalizer{grid.x_min, grid.x_max, grid.t_min, grid.t_max, p.v_free};
}

}  // namespace tse
