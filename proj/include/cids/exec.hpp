#pragma once

namespace cids {

// Selects between the OpenMP kernel and its serial reference. Both paths
// must produce identical results; tests compare them.
enum class Exec { serial, parallel };

}  // namespace cids
