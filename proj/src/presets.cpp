#include "mecdelay/config.hpp"

#include <map>

namespace mecdelay {

namespace {

// Two reference cases and the transmission-rate sweeps built on case 1.
const std::map<std::string, const char*>& presets() {
    static const std::map<std::string, const char*> table{
        {"case1", R"json({
  "name": "case1",
  "buffers": {"N1": 10, "N2": 15},
  "dt_ms": 1.0,
  "arrival": {
    "D0": [[0.2359, 0.1938], [0.2792, 0.2805]],
    "D1": [[0.1236, 0.4467], [0.2644, 0.1759]]
  },
  "transmission": {
    "alpha": [1.0],
    "T": [[0.6429]]
  },
  "computation": {
    "alpha": [1.0],
    "T": [[0.5455]]
  },
  "vacation": {
    "alpha": [0.6545, 0.3455],
    "T": [[0.3035, 0.0617], [0.6738, 0.1916]]
  },
  "solver": {
    "method": "direct"
  },
  "delay_bounds": [10, 20, 30, 40, 50, 60],
  "simulation": {
    "seed": 1,
    "confidence": 0.95,
    "relative_accuracy": 0.05,
    "warmup": 10000,
    "replication_slots": 1000000
  }
})json"},
        {"case2", R"json({
  "name": "case2",
  "buffers": {"N1": 10, "N2": 15},
  "dt_ms": 1.0,
  "arrival": {
    "D0": [[0.2359, 0.1938], [0.2792, 0.2805]],
    "D1": [[0.1236, 0.4467], [0.2644, 0.1759]]
  },
  "transmission": {
    "alpha": [1.0],
    "T": [[0.1667]]
  },
  "computation": {
    "alpha": [1.0],
    "T": [[0.5455]]
  },
  "vacation": {
    "alpha": [0.6969, 0.3031],
    "T": [[0.6378, 0.1007], [0.4613, 0.3278]]
  },
  "solver": {
    "method": "direct"
  },
  "delay_bounds": [10, 20, 30, 40, 50, 60, 70, 80],
  "simulation": {
    "seed": 1,
    "confidence": 0.95,
    "relative_accuracy": 0.05,
    "warmup": 10000,
    "replication_slots": 1000000
  }
})json"},
        {"sweep-high-load", R"json({
  "name": "sweep-high-load",
  "buffers": {"N1": 10, "N2": 15},
  "dt_ms": 1.0,
  "arrival": {
    "D0": [[0.2359, 0.1938], [0.2792, 0.2805]],
    "D1": [[0.1236, 0.4467], [0.2644, 0.1759]]
  },
  "transmission": {
    "alpha": [1.0],
    "T": [[0.6429]]
  },
  "computation": {
    "alpha": [1.0],
    "T": [[0.5455]]
  },
  "vacation": {
    "alpha": [0.6545, 0.3455],
    "T": [[0.3035, 0.0617], [0.6738, 0.1916]]
  },
  "solver": {
    "method": "direct"
  },
  "delay_bounds": [10, 20, 30, 40, 50, 60],
  "sweep": {
    "points": [
      {"mu1": 0.1429, "S1": 0.8571},
      {"mu1": 0.1786, "S1": 0.8214},
      {"mu1": 0.2381, "S1": 0.7619},
      {"mu1": 0.3571, "S1": 0.6429},
      {"mu1": 0.4, "S1": 0.6},
      {"mu1": 0.4545, "S1": 0.5455},
      {"mu1": 0.5263, "S1": 0.4737},
      {"mu1": 0.625, "S1": 0.375},
      {"mu1": 0.7692, "S1": 0.2308},
      {"mu1": 0.8333, "S1": 0.1667}
    ],
    "variants": [
      {
        "label": "lambda>mu2",
        "computation": {
          "alpha": [1.0],
          "T": [[0.5455]]
        }
      }
    ],
    "tail_offset": 20
  }
})json"},
        {"sweep-low-load", R"json({
  "name": "sweep-low-load",
  "buffers": {"N1": 10, "N2": 15},
  "dt_ms": 1.0,
  "arrival": {
    "D0": [[0.2359, 0.1938], [0.2792, 0.2805]],
    "D1": [[0.1236, 0.4467], [0.2644, 0.1759]]
  },
  "transmission": {
    "alpha": [1.0],
    "T": [[0.6429]]
  },
  "computation": {
    "alpha": [1.0],
    "T": [[0.5455]]
  },
  "vacation": {
    "alpha": [0.6545, 0.3455],
    "T": [[0.3035, 0.0617], [0.6738, 0.1916]]
  },
  "solver": {
    "method": "direct"
  },
  "delay_bounds": [10, 20, 30, 40, 50, 60],
  "sweep": {
    "points": [
      {"mu1": 0.1429, "S1": 0.8571},
      {"mu1": 0.1786, "S1": 0.8214},
      {"mu1": 0.2381, "S1": 0.7619},
      {"mu1": 0.3571, "S1": 0.6429},
      {"mu1": 0.4, "S1": 0.6},
      {"mu1": 0.4545, "S1": 0.5455},
      {"mu1": 0.5263, "S1": 0.4737},
      {"mu1": 0.625, "S1": 0.375},
      {"mu1": 0.7692, "S1": 0.2308},
      {"mu1": 0.8333, "S1": 0.1667}
    ],
    "variants": [
      {
        "label": "lambda<mu2",
        "computation": {
          "alpha": [1.0],
          "T": [[0.2857]]
        }
      }
    ],
    "tail_offset": 20
  }
})json"},
        {"pmf-figs", R"json({
  "name": "pmf-figs",
  "buffers": {"N1": 10, "N2": 15},
  "dt_ms": 1.0,
  "arrival": {
    "D0": [[0.2359, 0.1938], [0.2792, 0.2805]],
    "D1": [[0.1236, 0.4467], [0.2644, 0.1759]]
  },
  "transmission": {
    "alpha": [1.0],
    "T": [[0.6429]]
  },
  "computation": {
    "alpha": [1.0],
    "T": [[0.5455]]
  },
  "vacation": {
    "alpha": [0.6545, 0.3455],
    "T": [[0.3035, 0.0617], [0.6738, 0.1916]]
  },
  "solver": {
    "method": "direct"
  },
  "delay_bounds": [10, 20, 30, 40, 50, 60],
  "sweep": {
    "points": [
      {"mu1": 0.1429, "S1": 0.8571},
      {"mu1": 0.3571, "S1": 0.6429},
      {"mu1": 0.5263, "S1": 0.4737}
    ],
    "variants": [
      {
        "label": "lambda>mu2",
        "computation": {
          "alpha": [1.0],
          "T": [[0.5455]]
        }
      },
      {
        "label": "lambda<mu2",
        "computation": {
          "alpha": [1.0],
          "T": [[0.2857]]
        }
      }
    ],
    "tail_offset": 20
  }
})json"},
    };
    return table;
}

}  // namespace

std::vector<std::string> preset_names() {
    std::vector<std::string> out;
    for (const auto& [k, v] : presets()) out.push_back(k);
    return out;
}

std::string preset_text(const std::string& name) {
    const auto it = presets().find(name);
    if (it == presets().end()) throw ConfigError("--preset", "unknown preset \"" + name + "\"");
    return it->second;
}

ScenarioConfig preset(const std::string& name) { return parse_config(preset_text(name)); }

}  // namespace mecdelay
