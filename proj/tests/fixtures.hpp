#pragma once

// Shared test fixture: the 4-item packing interdiction example with
// interval support [0,10]x[1,11]x[6,12]x[7,13] and two 5-sample data sets.

#include <dri/instance.hpp>

namespace fixtures {

using dri::Matrix;
using dri::Vector;

struct Example1 {
  dri::InterdictionInstance inst;
  dri::PolyhedralSupport sup;
  dri::SampleSet data_l;
  dri::SampleSet data_f;
  Vector true_mean;  // (5, 6, 9, 10)

  Example1() {
    Matrix H(1, 4);
    H << 1, 1, 1, 1;
    Vector h(1);
    h << 2;
    Matrix Ft(1, 4);
    Ft << 1, 1, 1, 1;
    Vector ft(1);
    ft << 1;
    inst = dri::InterdictionInstance::packing(H, h, Ft, ft, Vector::Ones(4));
    Vector lo(4), hi(4);
    lo << 0, 1, 6, 7;
    hi << 10, 11, 12, 13;
    sup = dri::PolyhedralSupport::from_intervals(lo, hi);
    data_l.samples = Matrix(5, 4);
    data_l.samples << 10, 11, 8, 7,
        6, 7, 7, 9,
        10, 10, 7, 9,
        9, 11, 6, 7,
        10, 11, 7, 8;
    data_l.owner = dri::DataOwner::Leader;
    // column means are exactly (4, 5, 10, 11)
    data_f.samples = Matrix(5, 4);
    data_f.samples << 3, 3, 8, 13,
        1, 2, 9, 10,
        3, 11, 11, 13,
        9, 3, 10, 12,
        4, 6, 12, 7;
    data_f.owner = dri::DataOwner::Follower;
    true_mean = Vector(4);
    true_mean << 5, 6, 9, 10;
  }

  dri::SampleSet single(const Vector& c) const {
    dri::SampleSet s;
    s.samples = c.transpose();
    return s;
  }
};

inline dri::DroConfig saa_config() {
  dri::DroConfig cfg;
  cfg.alpha_l = cfg.alpha_f = 0.0;
  cfg.eps_l = cfg.eps_f = 0.0;
  return cfg;
}

}  // namespace fixtures
