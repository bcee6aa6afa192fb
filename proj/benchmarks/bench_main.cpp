// SPDX-FileCopyrightText: 2026 ffusion contributors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

BENCHMARK_MAIN();
