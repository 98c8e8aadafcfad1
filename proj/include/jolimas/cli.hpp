#pragma once

namespace jolimas {

// Command-line entry point. Returns 0 on success, 1 on a pipeline error and
// 2 on a usage or configuration error.
int dispatch(int argc, const char* const* argv);

}  // namespace jolimas
