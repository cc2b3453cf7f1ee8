// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

// The packaged benchmark_main archive is LTO bytecode tied to one compiler build.
BENCHMARK_MAIN();
