#include <random>

#include "doctest.h"
#include "qsalg/channels.hpp"

using namespace qsalg;

namespace {

bool matrices_equal(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (size_t i = 0; i < a.rows(); ++i)
    for (size_t j = 0; j < a.cols(); ++j)
      if (!(a.at(i, j) == b.at(i, j))) return false;
  return true;
}

std::shared_ptr<const HermitianBasis> qubit_basis() {
  static auto basis = std::make_shared<HermitianBasis>(hermitian_basis(2));
  return basis;
}

// rational unitaries from a Pythagorean rotation and a phase gate
CMatrix rot35() {
  CMatrix u(2, 2);
  u.at(0, 0) = CScalar(Rational(3, 5));
  u.at(0, 1) = CScalar(Rational(4, 5));
  u.at(1, 0) = CScalar(Rational(-4, 5));
  u.at(1, 1) = CScalar(Rational(3, 5));
  return u;
}

CMatrix phase_i() {
  CMatrix u(2, 2);
  u.at(0, 0) = CScalar(Rational(1));
  u.at(1, 1) = CScalar(Rational(0), Rational(1));
  return u;
}

CMatrix bell_state() {
  // |Phi+><Phi+| with |Phi+> = (|00> + |11>)/sqrt(2): all four corner entries 1/2
  CMatrix rho(4, 4);
  rho.at(0, 0) = CScalar(Rational(1, 2));
  rho.at(0, 3) = CScalar(Rational(1, 2));
  rho.at(3, 0) = CScalar(Rational(1, 2));
  rho.at(3, 3) = CScalar(Rational(1, 2));
  return rho;
}

}  // namespace

TEST_CASE("choi of the identity channel is the maximally entangled projector") {
  Channel id = identity_channel(qubit_basis());
  const CMatrix& c = id.choi();
  for (size_t a = 0; a < 2; ++a)
    for (size_t b = 0; b < 2; ++b) {
      CHECK(c.at(a * 2 + a, b * 2 + b).re == Scalar(Rational(1, 2)));
    }
  CHECK(c.at(1, 1).is_exact_zero());
  CHECK(c.at(2, 2).is_exact_zero());
}

TEST_CASE("choi of the depolarizing channel is I/d^2") {
  Channel dep = depolarizing_channel(qubit_basis());
  const CMatrix& c = dep.choi();
  CHECK(matrices_equal(c, Rational(1, 4) * CMatrix::identity(4)));
  CpVerdict v = is_completely_positive(dep);
  CHECK(v.verdict == Cert3::yes);
}

TEST_CASE("transfer / natural / choi round trips are exact") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<long> num(-3, 3);
  for (int trial = 0; trial < 100; ++trial) {
    CMatrix t(4, 4);
    for (size_t i = 0; i < 4; ++i)
      for (size_t j = 0; j < 4; ++j) t.at(i, j) = CScalar(rational_of(num(rng), 2));
    Channel ch = Channel::from_transfer(qubit_basis(), t);
    Channel back = Channel::from_natural(qubit_basis(), ch.natural());
    CHECK(matrices_equal(back.transfer(), t));
    Channel back2 = Channel::from_choi(qubit_basis(), ch.choi());
    CHECK(matrices_equal(back2.transfer(), t));
  }
}

TEST_CASE("complete positivity verdicts") {
  Channel id = identity_channel(qubit_basis());
  CHECK(is_completely_positive(id).verdict == Cert3::yes);
  CHECK(is_trace_preserving_exact(id));

  Channel theta = transpose_map(qubit_basis());
  CHECK(is_trace_preserving_exact(theta));
  CpVerdict v = is_completely_positive(theta);
  CHECK(v.verdict == Cert3::no);
  CHECK(v.lambda_min.contains(Rational(-1, 2)));
}

TEST_CASE("apply, compose, tensor") {
  auto basis = qubit_basis();
  Channel id = identity_channel(basis);
  Channel dep = depolarizing_channel(basis);
  CMatrix rho(2, 2);
  rho.at(0, 0) = CScalar(Rational(3, 4));
  rho.at(0, 1) = CScalar(Rational(1, 8), Rational(1, 8));
  rho.at(1, 0) = CScalar(Rational(1, 8), Rational(-1, 8));
  rho.at(1, 1) = CScalar(Rational(1, 4));

  CHECK(matrices_equal(apply(id, rho), rho));
  CHECK(matrices_equal(apply(dep, rho), Rational(1, 2) * CMatrix::identity(2)));

  Channel u = unitary_channel(basis, rot35());
  CHECK(matrices_equal(compose(u, id).transfer(), u.transfer()));
  CHECK(matrices_equal(compose(id, u).transfer(), u.transfer()));

  // associativity of composition on exact transfer matrices
  Channel v = unitary_channel(basis, phase_i());
  CHECK(matrices_equal(compose(compose(u, v), dep).transfer(),
                       compose(u, compose(v, dep)).transfer()));

  // tensor of TP maps is TP; applying preserves trace exactly
  Channel uv = tensor(u, v);
  CHECK(is_trace_preserving_exact(uv));
  CMatrix big = apply(uv, bell_state());
  CHECK(big.trace().re == Scalar(Rational(1)));
}

TEST_CASE("random mixed-unitary channels are certified CP and TP") {
  auto basis = qubit_basis();
  std::mt19937_64 rng(123);
  std::uniform_int_distribution<long> w(1, 5);
  for (int trial = 0; trial < 8; ++trial) {
    Rational w1(w(rng)), w2(w(rng)), w3(w(rng));
    Rational total = w1 + w2 + w3;
    CMatrix u1 = rot35();
    CMatrix u2 = phase_i();
    CMatrix u3 = u1 * u2;
    CMatrix nat =
        CScalar(w1 / total) * unitary_channel(basis, u1).natural() +
        CScalar(w2 / total) * unitary_channel(basis, u2).natural() +
        CScalar(w3 / total) * unitary_channel(basis, u3).natural();
    Channel mix = Channel::from_natural(basis, nat);
    CHECK(is_trace_preserving_exact(mix));
    CHECK(is_completely_positive(mix).verdict == Cert3::yes);
    // CP-certified channels map PSD fixtures to PSD-certified outputs
    CMatrix out = apply(mix, bell_state().submatrix({0, 1}));
    CHECK(psd_by_elimination(out) != Cert3::no);
    CHECK(out.trace().re == bell_state().submatrix({0, 1}).trace().re);
  }
}

TEST_CASE("partial transpose of the Bell state") {
  CMatrix pt = partial_transpose_first(bell_state(), 2, 2);
  // PT(|Phi+><Phi+|) = SWAP/2
  for (size_t a = 0; a < 2; ++a)
    for (size_t b = 0; b < 2; ++b)
      CHECK(pt.at(a * 2 + b, b * 2 + a).re == Scalar(Rational(1, 2)));
  Interval mn = min_eigenvalue_interval(pt);
  CHECK(mn.contains(Rational(-1, 2)));
  // involution
  CHECK(matrices_equal(partial_transpose_first(pt, 2, 2), bell_state()));
  // trace preserved, Hermitian, generally non-PSD
  CHECK(pt.trace().re == Scalar(Rational(1)));
  CHECK(pt.is_hermitian_exact());
  CHECK(psd_by_elimination(pt) == Cert3::no);
}

TEST_CASE("partial transpose keeps product states positive") {
  CMatrix rho_a(2, 2), rho_b(2, 2);
  rho_a.at(0, 0) = CScalar(Rational(2, 3));
  rho_a.at(0, 1) = CScalar(Rational(1, 4), Rational(1, 5));
  rho_a.at(1, 0) = CScalar(Rational(1, 4), Rational(-1, 5));
  rho_a.at(1, 1) = CScalar(Rational(1, 3));
  rho_b.at(0, 0) = CScalar(Rational(1, 2));
  rho_b.at(1, 1) = CScalar(Rational(1, 2));
  CMatrix prod = CMatrix::kron(rho_a, rho_b);
  CMatrix pt = partial_transpose_first(prod, 2, 2);
  CHECK(matrices_equal(pt, CMatrix::kron(rho_a.transpose(), rho_b)));
  CHECK(psd_by_elimination(pt) == psd_by_elimination(prod));
}

TEST_CASE("fidelity overlap basics") {
  CMatrix phi(2, 2);
  phi.at(0, 0) = CScalar(Rational(1));
  CHECK(fidelity_overlap(phi, phi) == Scalar(Rational(1)));
  CMatrix orth(2, 2);
  orth.at(1, 1) = CScalar(Rational(1));
  CHECK(fidelity_overlap(phi, orth).is_exact_zero());
  CHECK(fidelity_overlap(phi, Rational(1, 2) * CMatrix::identity(2)) == Scalar(Rational(1, 2)));
}

TEST_CASE("overlap via transfer agrees with the matrix path") {
  auto basis = qubit_basis();
  std::vector<Channel> chans = {unitary_channel(basis, rot35()), depolarizing_channel(basis)};
  CMatrix rho(2, 2);
  rho.at(0, 0) = CScalar(Rational(1));
  CMatrix phi(2, 2);
  phi.at(0, 0) = CScalar(Rational(1, 2));
  phi.at(0, 1) = CScalar(Rational(1, 2));
  phi.at(1, 0) = CScalar(Rational(1, 2));
  phi.at(1, 1) = CScalar(Rational(1, 2));
  std::vector<size_t> word = {0, 1, 0};
  Scalar via_vec = overlap_via_transfer(chans, word, rho, phi);
  CMatrix state = rho;
  for (size_t k = word.size(); k-- > 0;) state = apply(chans[word[k]], state);
  Scalar via_mat = fidelity_overlap(phi, state);
  CHECK(via_vec == via_mat);
}
