#include "tse/net.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "tse/rng.hpp"

// glibc's vector math library evaluates all 8 lanes' tanh in one call; the
// scalar loop below is the portable fallback.
#if defined(__AVX512F__) && defined(__GLIBC__) && __GLIBC__ >= 2 && \
    defined(__linux__)
#include <immintrin.h>
extern "C" __m512d _ZGVeN8v_tanh(__m512d);
#define TSE_VECTOR_TANH 1
#endif

namespace tse::net {

MlpShape MlpShape::canonical() {
  MlpShape s;
  s.hidden.assign(8, 20);
  return s;
}

void MlpShape::validate() const {
  if (input_dim != 2) throw std::invalid_argument("MlpShape: input_dim must be 2");
  if (output_dim != 1) throw std::invalid_argument("MlpShape: output_dim must be 1");
  if (hidden.empty()) throw std::invalid_argument("MlpShape: need at least one hidden layer");
  for (int w : hidden)
    if (w < 1) throw std::invalid_argument("MlpShape: layer widths must be >= 1");
}

int MlpShape::width(int l) const {
  if (l == 0) return input_dim;
  if (l == layer_count()) return output_dim;
  return hidden[l - 1];
}

int MlpShape::param_count() const {
  int n = 0;
  for (int l = 1; l <= layer_count(); ++l) n += width(l) * (width(l - 1) + 1);
  return n;
}

int MlpShape::weight_offset(int l) const {
  int off = 0;
  for (int k = 1; k < l; ++k) off += width(k) * (width(k - 1) + 1);
  return off;
}

int MlpShape::bias_offset(int l) const {
  return weight_offset(l) + width(l) * width(l - 1);
}

MlpParams init_params(const MlpShape& shape, const InputScaling& scaling,
                      std::uint64_t seed) {
  shape.validate();
  MlpParams p;
  p.shape = shape;
  p.scaling = scaling;
  p.theta.assign(shape.param_count(), 0.0);
  Rng rng(seed);
  for (int l = 1; l <= shape.layer_count(); ++l) {
    const int wi = shape.width(l - 1), wo = shape.width(l);
    const double limit = std::sqrt(6.0 / (wi + wo));
    double* w = p.theta.data() + shape.weight_offset(l);
    for (int k = 0; k < wo * wi; ++k) w[k] = rng.uniform(-limit, limit);
    // biases stay zero
  }
  return p;
}

// ---------------------------------------------------------------------------
// Batched evaluator
//
// Forward pass propagates, per unit, the value and its directional
// derivatives in x and t plus the second directional derivative in x
// (Taylor-mode to order 2). The backward pass runs reverse-mode over that
// augmented graph, so parameter gradients of any loss built from the jet are
// exact up to rounding. For tanh activations with h = tanh(z):
//   g'   = 1 - h^2          (d1)
//   g''  = -2 h g'          (d2)
//   g''' = g' (6 h^2 - 2)   (d3)
// ---------------------------------------------------------------------------

namespace {
constexpr int K = Evaluator::kLanes;
}

struct Evaluator::Impl {
  MlpShape shape;

  // Per layer, channel arrays of width(l) * K doubles.
  struct Layer {
    std::vector<double> h, gx, gt, gxx;   // propagated activation channels
    std::vector<double> zx, zt, zxx;      // pre-activation tangents (backward)
  };
  std::vector<Layer> layers;  // index 0 .. layer_count()

  // Adjoint ping-pong buffers sized to the widest layer.
  std::vector<double> ah, agx, agt, agxx;
  std::vector<double> bh, bgx, bgt, bgxx;
  std::vector<double> az, azx, azt, azxx;

  explicit Impl(const MlpShape& s) : shape(s) {
    shape.validate();
    layers.resize(shape.layer_count() + 1);
    int wmax = 1;
    for (int l = 0; l <= shape.layer_count(); ++l) {
      const int w = shape.width(l);
      wmax = std::max(wmax, w);
      auto& L = layers[l];
      for (auto* v : {&L.h, &L.gx, &L.gt, &L.gxx, &L.zx, &L.zt, &L.zxx})
        v->assign(static_cast<std::size_t>(w) * K, 0.0);
    }
    for (auto* v : {&ah, &agx, &agt, &agxx, &bh, &bgx, &bgt, &bgxx, &az, &azx,
                    &azt, &azxx})
      v->assign(static_cast<std::size_t>(wmax) * K, 0.0);
  }
};

Evaluator::Evaluator(const MlpShape& shape) : impl_(std::make_unique<Impl>(shape)) {}
Evaluator::~Evaluator() = default;

void Evaluator::forward_batch(const MlpParams& p, const double* xs, const double* ts,
                              int count, NetJet* jets_out) {
  Impl& im = *impl_;
  if (p.shape != im.shape)
    throw std::invalid_argument("Evaluator: params shape mismatch");
  if (count < 1 || count > K)
    throw std::invalid_argument("Evaluator: batch count out of range");

  const double sx = p.scaling.x_scale();
  const double st = p.scaling.t_scale();

  // Input layer: pad unused lanes with the last point (their adjoint seeds
  // are zero, so they contribute nothing).
  auto& in = im.layers[0];
  for (int lane = 0; lane < K; ++lane) {
    const int src = lane < count ? lane : count - 1;
    in.h[0 * K + lane] = p.scaling.map_x(xs[src]);
    in.h[1 * K + lane] = p.scaling.map_t(ts[src]);
    in.gx[0 * K + lane] = sx;
    in.gx[1 * K + lane] = 0.0;
    in.gt[0 * K + lane] = 0.0;
    in.gt[1 * K + lane] = st;
    in.gxx[0 * K + lane] = 0.0;
    in.gxx[1 * K + lane] = 0.0;
  }

  const int L = im.shape.layer_count();
  for (int l = 1; l <= L; ++l) {
    const int wi = im.shape.width(l - 1), wo = im.shape.width(l);
    const double* W = p.theta.data() + im.shape.weight_offset(l);
    const double* b = p.theta.data() + im.shape.bias_offset(l);
    const auto& src = im.layers[l - 1];
    auto& dst = im.layers[l];
    const bool hidden = l < L;

    for (int i = 0; i < wo; ++i) {
      double z[K], zx[K], zt[K], zxx[K];
      for (int lane = 0; lane < K; ++lane) {
        z[lane] = b[i];
        zx[lane] = zt[lane] = zxx[lane] = 0.0;
      }
      const double* __restrict wrow = W + static_cast<std::size_t>(i) * wi;
      const double* __restrict sh = src.h.data();
      const double* __restrict sgx = src.gx.data();
      const double* __restrict sgt = src.gt.data();
      const double* __restrict sgxx = src.gxx.data();
      for (int j = 0; j < wi; ++j) {
        const double w = wrow[j];
        const std::size_t q = static_cast<std::size_t>(j) * K;
        for (int lane = 0; lane < K; ++lane) {
          z[lane] += w * sh[q + lane];
          zx[lane] += w * sgx[q + lane];
          zt[lane] += w * sgt[q + lane];
          zxx[lane] += w * sgxx[q + lane];
        }
      }
      const std::size_t o = static_cast<std::size_t>(i) * K;
      if (hidden) {
        double hz[K];
#ifdef TSE_VECTOR_TANH
        static_assert(K % 8 == 0);
        for (int half = 0; half < K; half += 8)
          _mm512_storeu_pd(hz + half, _ZGVeN8v_tanh(_mm512_loadu_pd(z + half)));
#else
        for (int lane = 0; lane < K; ++lane) hz[lane] = std::tanh(z[lane]);
#endif
        for (int lane = 0; lane < K; ++lane) {
          const double h = hz[lane];
          const double d1 = 1.0 - h * h;
          const double d2 = -2.0 * h * d1;
          dst.h[o + lane] = h;
          dst.zx[o + lane] = zx[lane];
          dst.zt[o + lane] = zt[lane];
          dst.zxx[o + lane] = zxx[lane];
          dst.gx[o + lane] = d1 * zx[lane];
          dst.gt[o + lane] = d1 * zt[lane];
          dst.gxx[o + lane] = d2 * zx[lane] * zx[lane] + d1 * zxx[lane];
        }
      } else {
        for (int lane = 0; lane < K; ++lane) {
          dst.h[o + lane] = z[lane];
          dst.gx[o + lane] = zx[lane];
          dst.gt[o + lane] = zt[lane];
          dst.gxx[o + lane] = zxx[lane];
        }
      }
    }
  }

  const auto& out = im.layers[L];
  for (int lane = 0; lane < count; ++lane) {
    jets_out[lane].rho_hat = out.h[lane];
    jets_out[lane].d_dx = out.gx[lane];
    jets_out[lane].d_dt = out.gt[lane];
    jets_out[lane].d2_dx2 = out.gxx[lane];
  }
}

void Evaluator::backprop_batch(const MlpParams& p, const NetJet* seeds, int count,
                               double* grad) {
  Impl& im = *impl_;
  const int L = im.shape.layer_count();

  // Seed adjoints on the output layer (width 1); padded lanes seed zero.
  for (int lane = 0; lane < K; ++lane) {
    const bool live = lane < count;
    im.ah[lane] = live ? seeds[lane].rho_hat : 0.0;
    im.agx[lane] = live ? seeds[lane].d_dx : 0.0;
    im.agt[lane] = live ? seeds[lane].d_dt : 0.0;
    im.agxx[lane] = live ? seeds[lane].d2_dx2 : 0.0;
  }

  for (int l = L; l >= 1; --l) {
    const int wi = im.shape.width(l - 1), wo = im.shape.width(l);
    const double* W = p.theta.data() + im.shape.weight_offset(l);
    double* gW = grad + im.shape.weight_offset(l);
    double* gb = grad + im.shape.bias_offset(l);
    const auto& src = im.layers[l - 1];
    const auto& dst = im.layers[l];
    const bool hidden = l < L;

    // Activation adjoints -> pre-activation adjoints.
    for (int i = 0; i < wo; ++i) {
      const std::size_t o = static_cast<std::size_t>(i) * K;
      for (int lane = 0; lane < K; ++lane) {
        const double aH = im.ah[o + lane], aGx = im.agx[o + lane],
                     aGt = im.agt[o + lane], aGxx = im.agxx[o + lane];
        if (hidden) {
          const double h = dst.h[o + lane];
          const double d1 = 1.0 - h * h;
          const double d2 = -2.0 * h * d1;
          const double d3 = d1 * (6.0 * h * h - 2.0);
          const double zx = dst.zx[o + lane], zt = dst.zt[o + lane],
                       zxx = dst.zxx[o + lane];
          im.az[o + lane] = aH * d1 + aGx * d2 * zx + aGt * d2 * zt +
                            aGxx * (d3 * zx * zx + d2 * zxx);
          im.azx[o + lane] = aGx * d1 + aGxx * 2.0 * d2 * zx;
          im.azt[o + lane] = aGt * d1;
          im.azxx[o + lane] = aGxx * d1;
        } else {
          im.az[o + lane] = aH;
          im.azx[o + lane] = aGx;
          im.azt[o + lane] = aGt;
          im.azxx[o + lane] = aGxx;
        }
      }
    }

    // Parameter adjoints.
    const double* __restrict sh = src.h.data();
    const double* __restrict sgx = src.gx.data();
    const double* __restrict sgt = src.gt.data();
    const double* __restrict sgxx = src.gxx.data();
    for (int i = 0; i < wo; ++i) {
      const std::size_t o = static_cast<std::size_t>(i) * K;
      const double* __restrict az = im.az.data() + o;
      const double* __restrict azx = im.azx.data() + o;
      const double* __restrict azt = im.azt.data() + o;
      const double* __restrict azxx = im.azxx.data() + o;
      double sb = 0.0;
      for (int lane = 0; lane < K; ++lane) sb += az[lane];
      gb[i] += sb;
      double* __restrict gwrow = gW + static_cast<std::size_t>(i) * wi;
      for (int j = 0; j < wi; ++j) {
        const std::size_t q = static_cast<std::size_t>(j) * K;
        double s = 0.0;
        for (int lane = 0; lane < K; ++lane) {
          s += az[lane] * sh[q + lane] + azx[lane] * sgx[q + lane] +
               azt[lane] * sgt[q + lane] + azxx[lane] * sgxx[q + lane];
        }
        gwrow[j] += s;
      }
    }

    // Input-side activation adjoints (not needed below layer 1).
    if (l > 1) {
      const std::size_t need = static_cast<std::size_t>(wi) * K;
      std::fill_n(im.bh.begin(), need, 0.0);
      std::fill_n(im.bgx.begin(), need, 0.0);
      std::fill_n(im.bgt.begin(), need, 0.0);
      std::fill_n(im.bgxx.begin(), need, 0.0);
      double* __restrict bh = im.bh.data();
      double* __restrict bgx = im.bgx.data();
      double* __restrict bgt = im.bgt.data();
      double* __restrict bgxx = im.bgxx.data();
      for (int i = 0; i < wo; ++i) {
        const std::size_t o = static_cast<std::size_t>(i) * K;
        const double* __restrict az = im.az.data() + o;
        const double* __restrict azx = im.azx.data() + o;
        const double* __restrict azt = im.azt.data() + o;
        const double* __restrict azxx = im.azxx.data() + o;
        const double* __restrict wrow = W + static_cast<std::size_t>(i) * wi;
        for (int j = 0; j < wi; ++j) {
          const double w = wrow[j];
          const std::size_t q = static_cast<std::size_t>(j) * K;
          for (int lane = 0; lane < K; ++lane) {
            bh[q + lane] += w * az[lane];
            bgx[q + lane] += w * azx[lane];
            bgt[q + lane] += w * azt[lane];
            bgxx[q + lane] += w * azxx[lane];
          }
        }
      }
      im.ah.swap(im.bh);
      im.agx.swap(im.bgx);
      im.agt.swap(im.bgt);
      im.agxx.swap(im.bgxx);
    }
  }
}

double forward(const MlpParams& p, double x, double t) {
  return jet(p, x, t).rho_hat;
}

NetJet jet(const MlpParams& p, double x, double t) {
  Evaluator ev(p.shape);
  NetJet j;
  ev.forward_batch(p, &x, &t, 1, &j);
  return j;
}

// ---------------------------------------------------------------------------
// Composite loss evaluation
// ---------------------------------------------------------------------------

namespace {

struct Block {
  int group = 0;
  int begin = 0;
  int count = 0;
};

constexpr int kBlockPoints = 1024;  // multiple of K; fixed so the reduction
                                    // order does not depend on `jobs`

struct BlockResult {
  double sum_sq = 0;
  std::vector<double> grad;  // empty when gradients are not requested
};

void process_block(const MlpParams& p, const LossSpec& spec, const Block& blk,
                   bool want_grad, Evaluator& ev, BlockResult& out) {
  const LossGroup& group = spec.groups[blk.group];
  const double seed_scale =
      want_grad ? 2.0 * group.weight / static_cast<double>(group.points.size()) : 0.0;

  double xs[K], ts[K];
  NetJet jets[K], seeds[K];
  for (int done = 0; done < blk.count; done += K) {
    const int m = std::min(K, blk.count - done);
    const LossPoint* pts = group.points.data() + blk.begin + done;
    for (int lane = 0; lane < m; ++lane) {
      xs[lane] = pts[lane].x;
      ts[lane] = pts[lane].t;
    }
    ev.forward_batch(p, xs, ts, m, jets);
    for (int lane = 0; lane < m; ++lane) {
      const JetTermCoeffs& c = pts[lane].term;
      const NetJet& j = jets[lane];
      const double v = c.value(j);
      out.sum_sq += v * v;
      if (want_grad) {
        const double dv = seed_scale * v;
        seeds[lane].rho_hat = dv * (c.c_rho + c.c_rho_dx * j.d_dx);
        seeds[lane].d_dx = dv * (c.c_dx + c.c_rho_dx * j.rho_hat);
        seeds[lane].d_dt = dv * c.c_dt;
        seeds[lane].d2_dx2 = dv * c.c_dxx;
      }
    }
    if (want_grad) ev.backprop_batch(p, seeds, m, out.grad.data());
  }
}

LossBreakdown run_loss(const MlpParams& p, const LossSpec& spec,
                       std::vector<double>* grad, int jobs) {
  p.shape.validate();
  if (static_cast<int>(p.theta.size()) != p.shape.param_count())
    throw std::invalid_argument("loss evaluation: theta length does not match shape");

  std::size_t total_points = 0;
  for (const auto& g : spec.groups) total_points += g.points.size();
  if (spec.groups.empty() || total_points == 0)
    throw std::invalid_argument("loss evaluation: empty loss specification");

  std::vector<Block> blocks;
  for (int g = 0; g < static_cast<int>(spec.groups.size()); ++g) {
    const int n = static_cast<int>(spec.groups[g].points.size());
    for (int b = 0; b < n; b += kBlockPoints)
      blocks.push_back({g, b, std::min(kBlockPoints, n - b)});
  }

  const bool want_grad = grad != nullptr;
  const int n_params = p.shape.param_count();
  std::vector<BlockResult> results(blocks.size());
  if (want_grad)
    for (auto& r : results) r.grad.assign(n_params, 0.0);

  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(blocks.size())));
  if (workers == 1) {
    Evaluator ev(p.shape);
    for (std::size_t b = 0; b < blocks.size(); ++b)
      process_block(p, spec, blocks[b], want_grad, ev, results[b]);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      Evaluator ev(p.shape);
      while (true) {
        const std::size_t b = next.fetch_add(1);
        if (b >= blocks.size()) break;
        process_block(p, spec, blocks[b], want_grad, ev, results[b]);
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // Combine partial results in block order: deterministic for any `jobs`.
  LossBreakdown out;
  out.group_means.assign(spec.groups.size(), 0.0);
  for (std::size_t b = 0; b < blocks.size(); ++b)
    out.group_means[blocks[b].group] += results[b].sum_sq;
  for (std::size_t g = 0; g < spec.groups.size(); ++g) {
    if (!spec.groups[g].points.empty())
      out.group_means[g] /= static_cast<double>(spec.groups[g].points.size());
    out.total += spec.groups[g].weight * out.group_means[g];
  }
  if (want_grad) {
    grad->assign(n_params, 0.0);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const auto& gpart = results[b].grad;
      for (int k = 0; k < n_params; ++k) (*grad)[k] += gpart[k];
    }
  }
  return out;
}

}  // namespace

LossBreakdown loss_value(const MlpParams& p, const LossSpec& spec, int jobs) {
  return run_loss(p, spec, nullptr, jobs);
}

LossBreakdown loss_gradient(const MlpParams& p, const LossSpec& spec,
                            std::vector<double>& grad, int jobs) {
  return run_loss(p, spec, &grad, jobs);
}

// ---------------------------------------------------------------------------
// Parameter snapshots
// ---------------------------------------------------------------------------

void save_params(const MlpParams& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "tsenet 1\n";
  out << p.shape.input_dim;
  for (int w : p.shape.hidden) out << ' ' << w;
  out << ' ' << p.shape.output_dim << '\n';
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g %.17g\n", p.scaling.x_lo,
                p.scaling.x_hi, p.scaling.t_lo, p.scaling.t_hi);
  out << buf;
  for (double v : p.theta) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", v);
    out << buf;
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

MlpParams load_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "tsenet" || version != 1)
    throw std::runtime_error(path + ": not a tsenet v1 snapshot");
  std::string line;
  std::getline(in, line);  // rest of version line
  if (!std::getline(in, line)) throw std::runtime_error(path + ": truncated snapshot");
  std::istringstream shape_line(line);
  std::vector<int> widths;
  int w;
  while (shape_line >> w) widths.push_back(w);
  if (widths.size() < 3) throw std::runtime_error(path + ": bad shape line");

  MlpParams p;
  p.shape.input_dim = widths.front();
  p.shape.output_dim = widths.back();
  p.shape.hidden.assign(widths.begin() + 1, widths.end() - 1);
  in >> p.scaling.x_lo >> p.scaling.x_hi >> p.scaling.t_lo >> p.scaling.t_hi;
  p.shape.validate();
  p.theta.resize(p.shape.param_count());
  for (double& v : p.theta)
    if (!(in >> v)) throw std::runtime_error(path + ": truncated parameter vector");
  return p;
}

}  // namespace tse::net
