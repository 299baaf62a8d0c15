#include <gtest/gtest.h>

#include "oam/svg.hpp"

namespace oam {
namespace {

TEST(Svg, RendersPolylinePerSeries) {
  const std::vector<Series> s{{"a", {0, 1, 2}, {1, 0.5, 1}, "#000"}, {"b<&>", {0, 2}, {1, 1}, "#f00"}};
  const std::string svg = render_svg({"title", "x", "y"}, s);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  std::size_t n = 0;
  for (auto p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1)) ++n;
  EXPECT_EQ(n, 2u);
  EXPECT_NE(svg.find("b&lt;&amp;&gt;"), std::string::npos);
}

TEST(Svg, FlatSeriesStillRenders) {
  const std::vector<Series> s{{"flat", {0, 1}, {3, 3}}};
  EXPECT_NO_THROW(render_svg({}, s));
}

TEST(Svg, RejectsBadSeries) {
  EXPECT_THROW(render_svg({}, std::vector<Series>{}), std::invalid_argument);
  const std::vector<Series> s{{"bad", {0, 1}, {3}}};
  EXPECT_THROW(render_svg({}, s), std::invalid_argument);
}

}  // namespace
}  // namespace oam
