#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace safecontact::svg {

struct Series {
  std::string label;
  std::vector<double> values;
};

/// Minimal deterministic SVG charts (fixed canvas, fixed number formatting).
std::string bar_chart(const std::string& title, const std::vector<std::string>& labels,
                      const std::vector<double>& values, const std::string& y_label);

std::string histogram(const std::string& title, const std::vector<Series>& series, int bins,
                      const std::string& x_label, std::optional<double> marker = {});

std::string line_chart(const std::string& title, const std::vector<Series>& series, const std::string& x_label,
                       const std::string& y_label, std::optional<double> marker = {});

}  // namespace safecontact::svg
