#pragma once

namespace stark::cli {

/// Entry point of the `stark` executable. Returns 0 on success, 1 when every
/// requested energy failed numerically and 2 on usage errors (nothing written).
int run(int argc, char** argv);

}  // namespace stark::cli
