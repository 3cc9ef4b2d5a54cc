#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sil/model.hpp"
#include "sil/network.hpp"
#include "sil/types.hpp"

namespace sil {

// Every oracle returns the correlation E[y x phi_P'(<w, x> + b)], where P is
// the requested activation part. The gradient of neuron j is -a_j times this.
// Directions shorter than w (e.g. a model living on the first d coordinates
// probed in the augmented space) are zero-padded.

// Closed-form Hermite series for a polynomial link of a single direction v:
//   v * sum_{k=0}^{p-1} gamma_{k+1} rho_{k+1}(b) / k! <v,w>^k
//   + w * sum_{k=1}^{p} gamma_k rho_{k+2}(b) / k! <v,w>^k.
// plus keeps odd k in the v-sum and even k in the w-sum; minus the rest;
// full is computed as plus + minus.
Vector population_grad_single(const LinkSpec& link, const Vector& v, const Vector& w, double b,
                              ActivationPart part = ActivationPart::full);

inline Vector population_grad_single_evenodd(const LinkSpec& link, const Vector& v,
                                             const Vector& w, double b, ActivationPart part) {
  return population_grad_single(link, v, w, b, part);
}

// Sum of the single-direction series over the columns of an additive model.
Vector population_grad_additive(const IndexModel& model, const Vector& w, double b,
                                ActivationPart part = ActivationPart::full);

struct McGradient {
  Vector mean;
  Vector stderr_;
  Index samples = 0;
};

// Sample mean of y x phi_P'(<w,x> + b) over fresh draws from the model (with
// noise). When w is longer than the model dimension the extra coordinates are
// drawn as independent N(0,1) features.
McGradient mc_population_grad(const IndexModel& model, const Vector& w, double b,
                              Index mc_samples, std::uint64_t seed,
                              ActivationPart part = ActivationPart::full);

// Leading term rho_2(b) H_{JxJ} w with H = V D V^T, D = E[sigma(z) z z^T]
// estimated once by Monte Carlo and cached.
class LeadingTermOracle {
 public:
  LeadingTermOracle(IndexModel model, Index mc_samples, std::uint64_t seed);
  const Matrix& D() const { return check_.D; }
  const Matrix& H() const { return H_; }
  const FullRankCheck& assumption() const { return check_; }
  const IndexModel& model() const { return model_; }
  Vector leading(const Vector& w, double b, const std::vector<int>& J) const;

 private:
  IndexModel model_;
  FullRankCheck check_;
  Matrix H_;
};

struct MultiLeadingGradient {
  Vector leading;
  McGradient mc;
};

MultiLeadingGradient population_grad_multi_leading(const LeadingTermOracle& oracle,
                                                   const Vector& w, double b,
                                                   const std::vector<int>& J, Index mc_samples,
                                                   std::uint64_t seed);

// y = sum_k gamma2/sqrt(2) He_2(<v,x>) + gamma4/sqrt(24) He_4(<v,x>) with a
// dominated direction: first entry sqrt(1-(s-1)eps^2), then s-1 entries eps.
IndexModel make_cancellation_model(int d, int s, double eps, double gamma2 = 1.0,
                                   double gamma4 = 2.0 * std::sqrt(3.0));

// Informative and extra terms of E[y x phi'(<e_bar_i, x> + b)] for the
// cancellation model, written out term by term.
struct CancellationTerms {
  Vector informative;
  Vector extra;
};
CancellationTerms cancellation_terms(const IndexModel& model, int i, double c, double b = 0.0,
                                     double gamma2 = 1.0, double gamma4 = 2.0 * std::sqrt(3.0));

// ||informative + extra|| / ||informative|| at i = 0, c = 1, b = 0.
double cancellation_residual(int s, double eps);

// eps in (0, s^{-1/2}) with cancellation_residual(s, eps) = target, by bisection.
double desk_epsilon(int s, double target = 0.01);

// y and y-check models of the first-Hermite pathology, in dimension d >= 3.
IndexModel make_even_pair_model(int d);
IndexModel make_even_pair_linear_model(int d);

struct FixtureEntry {
  int i = 0;       // probe coordinate (0-based)
  double c = 1.0;  // shift; c = 1 probes e_i itself
  Vector gradient; // population gradient of a neuron with a = 1, b = 0
};

struct FixtureTable {
  std::string name;
  IndexModel model;
  std::vector<FixtureEntry> entries;
};

// even_pair, even_pair_linear and cancellation tables, with gradients filled
// from their hand-derived closed forms.
std::vector<FixtureTable> pathological_fixtures();

// CSV with header fixture,i,c,coord,value.
void write_fixture_csv(std::ostream& out, const std::vector<FixtureTable>& tables);

}  // namespace sil
