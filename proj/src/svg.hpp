#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dpmpm::svg {

// Fixed canvas shared by every figure.
inline constexpr double kWidth = 800;
inline constexpr double kHeight = 500;

struct Series {
  std::string name;
  std::vector<double> values;
};

std::string escape(std::string_view text);

// Polyline of y against x.
std::string line_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                      const std::vector<double>& x, const std::vector<double>& y);

// Vertical stems from zero, one per x (used for autocorrelations).
std::string stem_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                      const std::vector<double>& x, const std::vector<double>& y, double ymin, double ymax);

// Groups of bars, one group per category and one bar per series. Each bar
// carries a series="<name>" attribute.
std::string grouped_bars(const std::string& title, const std::string& ylabel, const std::vector<std::string>& categories,
                         const std::vector<Series>& series);

}  // namespace dpmpm::svg
