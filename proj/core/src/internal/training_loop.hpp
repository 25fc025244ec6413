#pragma once

#include <utility>
#include <vector>

#include "snap/classifier.hpp"

namespace snap::internal {

// Shared epoch loop: trains, tracks validation accuracy, snapshots the best
// model, and stops after `patience` epochs without improvement. The returned
// curve has one entry per completed epoch.
template <class TrainEpochFn, class ValAccuracyFn, class SnapshotFn>
std::vector<EpochStats> train_with_early_stopping(int max_epochs, int patience,
                                                  TrainEpochFn&& train_epoch,
                                                  ValAccuracyFn&& val_accuracy,
                                                  SnapshotFn&& snapshot_best) {
    std::vector<EpochStats> curve;
    double best = -1.0;
    int stale = 0;
    for (int epoch = 0; epoch < max_epochs; ++epoch) {
        double loss = train_epoch(epoch);
        double accuracy = val_accuracy();
        curve.push_back({loss, accuracy});
        if (accuracy > best) {
            best = accuracy;
            stale = 0;
            snapshot_best();
        } else if (++stale >= patience) {
            break;
        }
    }
    return curve;
}

} // namespace snap::internal
