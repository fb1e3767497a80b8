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


// Trains one depth-3 classifier on the digits {1, 3, 5, 7} and prints the
// loss every 50 iterations.
//
//   sample_train_single_classifier [data_dir] [iterations]

#include <iostream>

#include "evqc/evqc.hpp"

int main(int argc, char** argv) {
    const std::string dir = argc > 1 ? argv[1] : "data";
    const int iterations = argc > 2 ? std::stoi(argv[2]) : 500;
    try {
        const auto [train_raw, test_raw] = evqc::load_digits(dir + "/optdigits.tra", dir + "/optdigits.tes");
        const evqc::Dataset train_set = evqc::encode(train_raw), test_set = evqc::encode(test_raw);

        evqc::TrainConfig cfg;
        cfg.iterations = iterations;
        std::vector<evqc::TraceRow> trace;
        const auto clf = evqc::train(evqc::make_classifier(6, 3, 4, /*seed=*/7), train_set,
                                     evqc::SampleWeights::uniform(train_set.size()), {}, cfg, &trace);
        for (const auto& row : trace) {
            if (row.iteration % 50 == 0) std::cout << row.iteration << "  loss " << row.loss << "\n";
        }
        std::cout << "test accuracy " << evqc::accuracy(evqc::predict_all(clf, test_set), test_set) << "\n";
        evqc::write_checkpoint("single_d3.ckpt", {6, 3, 4, 7, 0.0}, clf.ansatz);
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    return 0;
}
