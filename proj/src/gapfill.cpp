#include <Eigen/Dense>

#include "p2t/data.hpp"

namespace p2t::data {

namespace {

// Least-squares polynomial through (t_i, v_i); returns coefficients c_0..c_d.
Eigen::VectorXd polyfit(const std::vector<double>& t,
                        const std::vector<double>& v, std::size_t degree) {
  const std::size_t n = t.size();
  if (n < degree + 1)
    throw SingularFit("fewer points than polynomial coefficients");
  Eigen::MatrixXd vand(n, degree + 1);
  for (std::size_t i = 0; i < n; ++i) {
    double p = 1.0;
    for (std::size_t d = 0; d <= degree; ++d) {
      vand(i, d) = p;
      p *= t[i];
    }
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(vand);
  if (qr.rank() < static_cast<Eigen::Index>(degree + 1))
    throw SingularFit("rank-deficient polynomial fit");
  Eigen::Map<const Eigen::VectorXd> rhs(v.data(), n);
  return qr.solve(rhs);
}

double polyval(const Eigen::VectorXd& c, double t) {
  double acc = 0.0, p = 1.0;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    acc += c(i) * p;
    p *= t;
  }
  return acc;
}

}  // namespace

std::vector<FrameRecord> fill_ball_gaps(const std::vector<FrameRecord>& records,
                                        std::size_t context,
                                        std::size_t degree) {
  if (degree < 1) throw InvalidParams("gap-fill degree must be >= 1");
  if (context < 1) throw InvalidParams("gap-fill context must be >= 1");
  std::vector<FrameRecord> out = records;
  std::size_t i = 0;
  while (i < out.size()) {
    if (out[i].ball_visible()) {
      ++i;
      continue;
    }
    const std::size_t gap_begin = i;
    while (i < out.size() && !out[i].ball_visible()) ++i;
    const std::size_t gap_end = i;  // one past
    // collect `context` visible frames walking outward from each side
    std::vector<double> t, vx, vy;
    std::size_t got_before = 0;
    for (std::size_t j = gap_begin; j > 0 && got_before < context;) {
      --j;
      if (!out[j].ball_visible()) break;  // abutting earlier gap
      t.push_back(static_cast<double>(out[j].frame_index));
      vx.push_back(out[j].ball->x);
      vy.push_back(out[j].ball->y);
      ++got_before;
    }
    std::size_t got_after = 0;
    for (std::size_t j = gap_end; j < out.size() && got_after < context; ++j) {
      if (!out[j].ball_visible()) break;
      t.push_back(static_cast<double>(out[j].frame_index));
      vx.push_back(out[j].ball->x);
      vy.push_back(out[j].ball->y);
      ++got_after;
    }
    if (got_before < context || got_after < context)
      throw InsufficientContext(
          "gap at frame " + std::to_string(out[gap_begin].frame_index) +
          " has fewer than " + std::to_string(context) +
          " visible flanking frames");
    // shift the time origin into the gap for conditioning
    const double t0 = t[0];
    for (auto& tt : t) tt -= t0;
    const auto cx = polyfit(t, vx, degree);
    const auto cy = polyfit(t, vy, degree);
    for (std::size_t j = gap_begin; j < gap_end; ++j) {
      const double tt = static_cast<double>(out[j].frame_index) - t0;
      out[j].ball = Point{polyval(cx, tt), polyval(cy, tt)};
      out[j].interpolated = true;
    }
  }
  return out;
}

}  // namespace p2t::data
