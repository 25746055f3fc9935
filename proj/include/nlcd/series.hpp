#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "nlcd/errors.hpp"

namespace nlcd {

/// Timestamped named channels (norms, energies, tail masses, ...).
/// Timestamps are strictly increasing and every channel has one value per
/// timestamp.
struct TimeSeries {
    std::vector<double> times;
    std::map<std::string, std::vector<double>> channels;

    void append(double t, const std::map<std::string, double>& row) {
        if (!times.empty() && t <= times.back()) {
            throw ConfigInvalid("TimeSeries: timestamps must strictly increase");
        }
        if (!times.empty()) {
            if (row.size() != channels.size()) {
                throw ConfigInvalid("TimeSeries: row has a different channel set");
            }
            for (const auto& [name, values] : channels) {
                if (row.find(name) == row.end()) {
                    throw ConfigInvalid("TimeSeries: missing channel " + name);
                }
                (void)values;
            }
        }
        times.push_back(t);
        for (const auto& [name, value] : row) {
            channels[name].push_back(value);
        }
    }

    std::size_t size() const { return times.size(); }

    const std::vector<double>& channel(const std::string& name) const {
        auto it = channels.find(name);
        if (it == channels.end()) {
            throw ConfigInvalid("TimeSeries: no channel named " + name);
        }
        return it->second;
    }

    bool has_channel(const std::string& name) const {
        return channels.find(name) != channels.end();
    }
};

}  // namespace nlcd
