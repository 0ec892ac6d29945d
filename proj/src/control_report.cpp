#include "nlt/control_report.hpp"

#include <algorithm>

namespace nlt {

void ControlReport::add(ControlRecord rec) {
    pass = pass && rec.pass;
    records.push_back(std::move(rec));
}

const ControlRecord* ControlReport::find(const std::string& id, int level) const {
    auto it = std::find_if(records.begin(), records.end(), [&](const ControlRecord& r) {
        return r.id == id && r.level == level;
    });
    return it == records.end() ? nullptr : &*it;
}

double ControlReport::worst_margin() const {
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& r : records) {
        if (!r.vacuous) {
            worst = std::min(worst, r.margin);
        }
    }
    return worst;
}

}  // namespace nlt
