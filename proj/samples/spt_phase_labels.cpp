// Copyright 2026 The evqc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Prints the string order parameter and exact phase label along the h1 = 0
// line of a 9-site cluster-Ising chain, then the threshold crossing.

#include <cstdio>

#include "evqc/evqc.hpp"

int main() {
    try {
        const evqc::SptConfig spt;
        std::printf("h2/J     energy      S        label\n");
        for (int i = 0; i <= 16; ++i) {
            const double h2 = 0.1 * i;
            const auto s = evqc::solve_spt_point(spt, 0.0, h2);
            std::printf("%-8.2f %-11.6f %-8.4f %d\n", h2, s.energy, s.string_order, s.label);
        }
        std::printf("crossing at h2/J = %.4f\n", evqc::string_order_crossing(spt, 0.0, 0.1, 1.6));
    } catch (const std::exception& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 1;
    }
    return 0;
}
