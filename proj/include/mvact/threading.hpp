#pragma once

namespace mvact::threading {

// Global worker count for the OpenMP kernels. 1 selects the serial
// reference path everywhere and is the bit-exact mode.
void set_threads(int n);
int threads();
bool parallel();  // threads() > 1 and OpenMP compiled in

}  // namespace mvact::threading
