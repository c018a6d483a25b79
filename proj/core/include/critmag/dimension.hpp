#pragma once

namespace critmag {

// Space dimension N. Only N > 4 is admissible.
class Dimension {
 public:
  explicit Dimension(int n);

  int n() const { return n_; }
  double two_star() const { return 2.0 * n_ / (n_ - 2.0); }
  // Area of the unit sphere S^{N-1} in R^N.
  double sphere_area() const;

  bool operator==(const Dimension& o) const { return n_ == o.n_; }
  bool operator!=(const Dimension& o) const { return n_ != o.n_; }

 private:
  int n_;
};

// Area of the unit sphere S^d in R^{d+1}.
double sphere_area(int d);

}  // namespace critmag
