#pragma once

#include <functional>

namespace lps {

struct LineSearchOptions {
    double rel_tol = 1e-4;
    /// Evaluations allowed in the Brent stage.
    int max_evaluations = 25;
    /// Doubling/halving steps allowed while bracketing.
    int max_bracket_steps = 40;
};

struct LineSearchResult {
    double tau = 0.0;
    double value = 0.0;
    int evaluations = 0;
    bool ascent = false;
};

/// Brent's parabolic/golden-section maximisation of phi on [a, c] given an
/// interior point b with phi(b) >= phi(a), phi(c). fa, fb, fc are the known values.
LineSearchResult brent_maximize(const std::function<double(double)>& phi, double a, double b, double c, double fa,
                                double fb, double fc, const LineSearchOptions& opt = {});

/// Brackets a maximiser of phi along tau >= 0 by doubling from tau0 (halving
/// if tau0 gives no ascent over phi0 = phi(0)), then refines with Brent.
/// Returns tau = 0 and value = phi0 when no ascent is found.
LineSearchResult arc_line_search(const std::function<double(double)>& phi, double phi0, double tau0,
                                 const LineSearchOptions& opt = {});

}  // namespace lps
