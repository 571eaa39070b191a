#include "fsl/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "fsl/kernels.hpp"

namespace fsl {

const char* to_string(OpKind kind) {
    switch (kind) {
        case OpKind::Input: return "input";
        case OpKind::Parameter: return "parameter";
        case OpKind::MatMul: return "matmul";
        case OpKind::Add: return "add";
        case OpKind::Sub: return "sub";
        case OpKind::AddRowBias: return "add_row_bias";
        case OpKind::Relu: return "relu";
        case OpKind::Square: return "square";
        case OpKind::Scale: return "scale";
        case OpKind::AddScalar: return "add_scalar";
        case OpKind::Sum: return "sum";
        case OpKind::Mean: return "mean";
        case OpKind::Reshape: return "reshape";
        case OpKind::Conv2d: return "conv2d";
        case OpKind::MaxPool2d: return "max_pool";
        case OpKind::Gather: return "gather";
        case OpKind::GatherRows: return "gather_rows";
        case OpKind::GroupMean: return "group_mean";
        case OpKind::SqDistance: return "sq_distance";
        case OpKind::Distance: return "distance";
        case OpKind::ReduceMax: return "reduce_max";
        case OpKind::ReduceMin: return "reduce_min";
        case OpKind::SoftmaxCrossEntropy: return "softmax_cross_entropy";
    }
    return "unknown";
}

namespace {

constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t fnv_bytes(std::uint64_t h, const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= kFnvPrime;
    }
    return h;
}

void require_same_shape(const Shape& a, const Shape& b, const char* op) {
    if (a != b) {
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a) + " vs " + shape_str(b));
    }
}

}  // namespace

template <typename T>
std::uint64_t ParameterStore<T>::checksum() const {
    std::uint64_t h = 1469598103934665603ULL;
    for (const auto& p : params_) {
        h = fnv_bytes(h, p.name.data(), p.name.size());
        for (std::size_t d : p.value.shape()) {
            const std::uint64_t d64 = d;
            h = fnv_bytes(h, &d64, sizeof d64);
        }
        h = fnv_bytes(h, p.value.data().data(), p.value.size() * sizeof(T));
    }
    return h;
}

template <typename T>
Graph<T>::Graph(const ParameterStore<T>* params, bool check_finite)
    : params_(params), check_finite_(check_finite) {}

template <typename T>
void Graph<T>::record(std::uint64_t decision) {
    signature_ ^= decision;
    signature_ *= kFnvPrime;
}

template <typename T>
void Graph<T>::check_node(NodeId id, const Tensor<T>& t, const char* phase) const {
    if (!check_finite_) return;
    if (!t.all_finite()) {
        throw NumericError(std::string("non-finite ") + phase + " at node #" + std::to_string(id) +
                           " (" + to_string(nodes_[id].kind) + ")");
    }
}

template <typename T>
NodeId Graph<T>::push(OpKind kind, std::vector<NodeId> parents, Tensor<T> value,
                      std::function<void(Graph&, NodeId)> backward) {
    for (NodeId p : parents) {
        if (p >= nodes_.size()) throw InvalidArgument("graph node id out of range");
    }
    Node node{kind, std::move(parents), std::move(value), Tensor<T>{}, 0, std::move(backward)};
    nodes_.push_back(std::move(node));
    const NodeId id = nodes_.size() - 1;
    check_node(id, nodes_[id].value, "value");
    return id;
}

template <typename T>
Tensor<T>& Graph<T>::grad_of(NodeId id) {
    Node& n = nodes_[id];
    if (n.adjoint.size() != n.value.size() || n.adjoint.shape() != n.value.shape()) {
        n.adjoint = Tensor<T>(n.value.shape());
    }
    return n.adjoint;
}

template <typename T>
NodeId Graph<T>::input(Tensor<T> value) {
    return push(OpKind::Input, {}, std::move(value), nullptr);
}

template <typename T>
NodeId Graph<T>::parameter(ParamId id) {
    if (params_ == nullptr || id >= params_->size()) {
        throw InvalidArgument("parameter id " + std::to_string(id) + " not in the graph's store");
    }
    const NodeId nid = push(OpKind::Parameter, {}, params_->value(id), nullptr);
    nodes_[nid].param = id;
    return nid;
}

template <typename T>
NodeId Graph<T>::matmul(NodeId a, NodeId b) {
    Tensor<T> out = kernels::matmul(value(a), value(b));
    return push(OpKind::MatMul, {a, b}, std::move(out), [a, b](Graph& g, NodeId self) {
        const Tensor<T>& av = g.value(a);
        const Tensor<T>& bv = g.value(b);
        const Tensor<T>& up = g.nodes_[self].adjoint;
        const std::size_t n = av.dim(0), k = av.dim(1), m = bv.dim(1);
        Tensor<T>& ga = g.grad_of(a);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t p = 0; p < k; ++p) {
                T acc{0};
                for (std::size_t j = 0; j < m; ++j) acc += up[i * m + j] * bv[p * m + j];
                ga[i * k + p] += acc;
            }
        }
        Tensor<T>& gb = g.grad_of(b);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t p = 0; p < k; ++p) {
                const T av_ip = av[i * k + p];
                if (av_ip == T{0}) continue;
                for (std::size_t j = 0; j < m; ++j) gb[p * m + j] += av_ip * up[i * m + j];
            }
        }
    });
}

template <typename T>
NodeId Graph<T>::add(NodeId a, NodeId b) {
    require_same_shape(value(a).shape(), value(b).shape(), "add");
    Tensor<T> out = value(a);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += value(b)[i];
    return push(OpKind::Add, {a, b}, std::move(out), [a, b](Graph& g, NodeId self) {
        const Tensor<T> up = g.nodes_[self].adjoint;
        Tensor<T>& ga = g.grad_of(a);
        for (std::size_t i = 0; i < up.size(); ++i) ga[i] += up[i];
        Tensor<T>& gb = g.grad_of(b);
        for (std::size_t i = 0; i < up.size(); ++i) gb[i] += up[i];
    });
}

template <typename T>
NodeId Graph<T>::sub(NodeId a, NodeId b) {
    require_same_shape(value(a).shape(), value(b).shape(), "sub");
    Tensor<T> out = value(a);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= value(b)[i];
    return push(OpKind::Sub, {a, b}, std::move(out), [a, b](Graph& g, NodeId self) {
        const Tensor<T> up = g.nodes_[self].adjoint;
        Tensor<T>& ga = g.grad_of(a);
        for (std::size_t i = 0; i < up.size(); ++i) ga[i] += up[i];
        Tensor<T>& gb = g.grad_of(b);
        for (std::size_t i = 0; i < up.size(); ++i) gb[i] -= up[i];
    });
}

template <typename T>
NodeId Graph<T>::add_row_bias(NodeId x, NodeId bias) {
    const Tensor<T>& xv = value(x);
    const Tensor<T>& bv = value(bias);
    kernels::require_matrix(xv, "add_row_bias input");
    if (bv.size() != xv.dim(1)) {
        throw ShapeError("add_row_bias: bias " + shape_str(bv.shape()) + " vs input " +
                         shape_str(xv.shape()));
    }
    Tensor<T> out = xv;
    const std::size_t n = xv.dim(0), m = xv.dim(1);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) out[i * m + j] += bv[j];
    return push(OpKind::AddRowBias, {x, bias}, std::move(out), [x, bias, n, m](Graph& g, NodeId self) {
        const Tensor<T> up = g.nodes_[self].adjoint;
        Tensor<T>& gx = g.grad_of(x);
        for (std::size_t i = 0; i < up.size(); ++i) gx[i] += up[i];
        Tensor<T>& gb = g.grad_of(bias);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) gb[j] += up[i * m + j];
    });
}

template <typename T>
NodeId Graph<T>::relu(NodeId x) {
    Tensor<T> out = value(x);
    std::uint64_t mask_hash = 1469598103934665603ULL;
    for (auto& v : out.vec()) {
        const unsigned char on = v > T{0};
        mask_hash = fnv_bytes(mask_hash, &on, 1);
        if (v <= T{0}) v = T{0};
    }
    record(mask_hash);
    return push(OpKind::Relu, {x}, std::move(out), [x](Graph& g, NodeId self) {
        const Tensor<T> up = g.nodes_[self].adjoint;
        const Tensor<T>& xv = g.value(x);
        Tensor<T>& gx = g.grad_of(x);
        for (std::size_t i = 0; i < up.size(); ++i) {
            if (xv[i] > T{0}) gx[i] += up[i];
        }
    });
}

template <typename T>
NodeId Graph<T>::square(NodeId x) {
    Tensor<T> out = value(x);
    for (auto& v : out.vec()) v *= v;
    return push(OpKind::Square, {x}, std::move(out), [x](Graph& g, NodeId self) {
        const Tensor<T> up = g.nodes_[self].adjoint;
        const Tensor<T>& xv = g.value(x);
        Tensor<T>& gx = g.grad_of(x);
        for (std::size_t i = 0; i < up.size(); ++i) gx[i] += T{2} * xv[i] * up[i];
    });
}

template <typename T>
NodeId Graph<T>::scale(NodeId x, T factor) {
    Tensor<T> out = value(x);
    for (auto& v : out.vec()) v *= factor;
    return push(OpKind::Scale, {x}, std::move(out), [x, factor](Graph& g, NodeId self) {
        const Tensor<T> up = g.nodes_[self].adjoint;
        Tensor<T>& gx = g.grad_of(x);
        for (std::size_t i = 0; i < up.size(); ++i) gx[i] += factor * up[i];
    });
}

template <typename T>
NodeId Graph<T>::add_scalar(NodeId x, T offset) {
    Tensor<T> out = value(x);
    for (auto& v : out.vec()) v += offset;
    return push(OpKind::AddScalar, {x}, std::move(out), [x](Graph& g, NodeId self) {
        const Tensor<T> up = g.nodes_[self].adjoint;
        Tensor<T>& gx = g.grad_of(x);
        for (std::size_t i = 0; i < up.size(); ++i) gx[i] += up[i];
    });
}

template <typename T>
NodeId Graph<T>::sum(NodeId x) {
    T acc{0};
    for (T v : value(x).data()) acc += v;
    return push(OpKind::Sum, {x}, Tensor<T>::scalar(acc), [x](Graph& g, NodeId self) {
        const T up = g.nodes_[self].adjoint[0];
        Tensor<T>& gx = g.grad_of(x);
        for (auto& v : gx.vec()) v += up;
    });
}

template <typename T>
NodeId Graph<T>::mean(NodeId x) {
    T acc{0};
    for (T v : value(x).data()) acc += v;
    const T n = static_cast<T>(value(x).size());
    return push(OpKind::Mean, {x}, Tensor<T>::scalar(acc / n), [x, n](Graph& g, NodeId self) {
        const T up = g.nodes_[self].adjoint[0] / n;
        Tensor<T>& gx = g.grad_of(x);
        for (auto& v : gx.vec()) v += up;
    });
}

template <typename T>
NodeId Graph<T>::reshape(NodeId x, Shape shape) {
    Tensor<T> out = value(x).reshaped(std::move(shape));
    return push(OpKind::Reshape, {x}, std::move(out), [x](Graph& g, NodeId self) {
        const Tensor<T> up = g.nodes_[self].adjoint;
        Tensor<T>& gx = g.grad_of(x);
        for (std::size_t i = 0; i < up.size(); ++i) gx[i] += up[i];
    });
}

template <typename T>
NodeId Graph<T>::conv2d_3x3(NodeId x, NodeId weight, NodeId bias) {
    const Tensor<T>& xv = value(x);
    const Tensor<T>& wv = value(weight);
    const Tensor<T>& bv = value(bias);
    if (xv.rank() != 4 || wv.rank() != 4 || wv.dim(2) != 3 || wv.dim(3) != 3 || wv.dim(1) != xv.dim(1) ||
        bv.size() != wv.dim(0)) {
        throw ShapeError("conv2d_3x3: input " + shape_str(xv.shape()) + ", weight " + shape_str(wv.shape()) +
                         ", bias " + shape_str(bv.shape()));
    }
    const std::size_t B = xv.dim(0), C = xv.dim(1), H = xv.dim(2), W = xv.dim(3), O = wv.dim(0);
    Tensor<T> out(Shape{B, O, H, W});
    for (std::size_t b = 0; b < B; ++b) {
        for (std::size_t o = 0; o < O; ++o) {
            T* plane = &out[((b * O) + o) * H * W];
            for (std::size_t i = 0; i < H * W; ++i) plane[i] = bv[o];
            for (std::size_t c = 0; c < C; ++c) {
                const T* in = &xv[((b * C) + c) * H * W];
                const T* k = &wv[((o * C) + c) * 9];
                for (std::size_t ky = 0; ky < 3; ++ky) {
                    for (std::size_t kx = 0; kx < 3; ++kx) {
                        const T kw = k[ky * 3 + kx];
                        // output (y, x) reads input (y + ky - 1, x + kx - 1)
                        const std::size_t y0 = ky == 0 ? 1 : 0, y1 = ky == 2 ? H - 1 : H;
                        const std::size_t x0 = kx == 0 ? 1 : 0, x1 = kx == 2 ? W - 1 : W;
                        for (std::size_t y = y0; y < y1; ++y) {
                            const T* irow = in + (y + ky - 1) * W + (kx - 1);
                            T* orow = plane + y * W;
                            for (std::size_t xx = x0; xx < x1; ++xx) orow[xx] += kw * irow[xx];
                        }
                    }
                }
            }
        }
    }
    return push(OpKind::Conv2d, {x, weight, bias}, std::move(out),
                [x, weight, bias, B, C, H, W, O](Graph& g, NodeId self) {
                    const Tensor<T>& up = g.nodes_[self].adjoint;
                    const Tensor<T>& xv = g.value(x);
                    const Tensor<T>& wv = g.value(weight);
                    Tensor<T> gx(xv.shape()), gw(wv.shape()), gb(g.value(bias).shape());
                    for (std::size_t b = 0; b < B; ++b) {
                        for (std::size_t o = 0; o < O; ++o) {
                            const T* uplane = &up[((b * O) + o) * H * W];
                            for (std::size_t i = 0; i < H * W; ++i) gb[o] += uplane[i];
                            for (std::size_t c = 0; c < C; ++c) {
                                const T* in = &xv[((b * C) + c) * H * W];
                                T* gin = &gx[((b * C) + c) * H * W];
                                const T* k = &wv[((o * C) + c) * 9];
                                T* gk = &gw[((o * C) + c) * 9];
                                for (std::size_t ky = 0; ky < 3; ++ky) {
                                    for (std::size_t kx = 0; kx < 3; ++kx) {
                                        const T kw = k[ky * 3 + kx];
                                        const std::size_t y0 = ky == 0 ? 1 : 0, y1 = ky == 2 ? H - 1 : H;
                                        const std::size_t x0 = kx == 0 ? 1 : 0, x1 = kx == 2 ? W - 1 : W;
                                        T acc{0};
                                        for (std::size_t y = y0; y < y1; ++y) {
                                            const std::size_t off = (y + ky - 1) * W + (kx - 1);
                                            const T* urow = uplane + y * W;
                                            for (std::size_t xx = x0; xx < x1; ++xx) {
                                                acc += urow[xx] * in[off + xx];
                                                gin[off + xx] += kw * urow[xx];
                                            }
                                        }
                                        gk[ky * 3 + kx] += acc;
                                    }
                                }
                            }
                        }
                    }
                    auto accumulate = [&g](NodeId id, const Tensor<T>& d) {
                        Tensor<T>& dst = g.grad_of(id);
                        for (std::size_t i = 0; i < d.size(); ++i) dst[i] += d[i];
                    };
                    accumulate(x, gx);
                    accumulate(weight, gw);
                    accumulate(bias, gb);
                });
}

template <typename T>
NodeId Graph<T>::max_pool_2x2(NodeId x) {
    const Tensor<T>& xv = value(x);
    if (xv.rank() != 4 || xv.dim(2) < 2 || xv.dim(3) < 2) {
        throw ShapeError("max_pool_2x2: input must be [B,C,H,W] with H,W >= 2, got " + shape_str(xv.shape()));
    }
    const std::size_t B = xv.dim(0), C = xv.dim(1), H = xv.dim(2), W = xv.dim(3);
    const std::size_t OH = H / 2, OW = W / 2;
    Tensor<T> out(Shape{B, C, OH, OW});
    std::vector<std::size_t> winners(out.size());
    std::uint64_t h = 1469598103934665603ULL;
    for (std::size_t bc = 0; bc < B * C; ++bc) {
        const T* in = &xv[bc * H * W];
        for (std::size_t oy = 0; oy < OH; ++oy) {
            for (std::size_t ox = 0; ox < OW; ++ox) {
                std::size_t best = (2 * oy) * W + 2 * ox;
                unsigned char slot = 0, k = 0;
                for (std::size_t dy = 0; dy < 2; ++dy) {
                    for (std::size_t dx = 0; dx < 2; ++dx, ++k) {
                        const std::size_t idx = (2 * oy + dy) * W + 2 * ox + dx;
                        if (in[idx] > in[best]) {
                            best = idx;
                            slot = k;
                        }
                    }
                }
                const std::size_t o = (bc * OH + oy) * OW + ox;
                out[o] = in[best];
                winners[o] = bc * H * W + best;
                h = fnv_bytes(h, &slot, 1);
            }
        }
    }
    record(h);
    return push(OpKind::MaxPool2d, {x}, std::move(out), [x, winners = std::move(winners)](Graph& g, NodeId self) {
        const Tensor<T> up = g.nodes_[self].adjoint;
        Tensor<T>& gx = g.grad_of(x);
        for (std::size_t i = 0; i < up.size(); ++i) gx[winners[i]] += up[i];
    });
}

template <typename T>
NodeId Graph<T>::gather(NodeId x, std::vector<std::size_t> flat_indices) {
    const Tensor<T>& xv = value(x);
    if (flat_indices.empty()) throw ShapeError("gather: empty index list");
    Tensor<T> out(Shape{flat_indices.size()});
    for (std::size_t i = 0; i < flat_indices.size(); ++i) {
        if (flat_indices[i] >= xv.size()) throw ShapeError("gather: index out of range");
        out[i] = xv[flat_indices[i]];
    }
    return push(OpKind::Gather, {x}, std::move(out), [x, idx = std::move(flat_indices)](Graph& g, NodeId self) {
        const Tensor<T> up = g.nodes_[self].adjoint;
        Tensor<T>& gx = g.grad_of(x);
        for (std::size_t i = 0; i < idx.size(); ++i) gx[idx[i]] += up[i];
    });
}

template <typename T>
NodeId Graph<T>::gather_rows(NodeId x, std::vector<std::size_t> rows) {
    const Tensor<T>& xv = value(x);
    if (rows.empty()) throw ShapeError("gather_rows: empty row list");
    const std::size_t d = xv.cols();
    Shape shape = xv.shape();
    shape[0] = rows.size();
    Tensor<T> out(shape);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= xv.rows()) throw ShapeError("gather_rows: row out of range");
        std::copy_n(&xv[rows[i] * d], d, &out[i * d]);
    }
    return push(OpKind::GatherRows, {x}, std::move(out), [x, d, rows = std::move(rows)](Graph& g, NodeId self) {
        const Tensor<T> up = g.nodes_[self].adjoint;
        Tensor<T>& gx = g.grad_of(x);
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t k = 0; k < d; ++k) gx[rows[i] * d + k] += up[i * d + k];
    });
}

template <typename T>
NodeId Graph<T>::group_mean(NodeId x, std::vector<std::vector<std::size_t>> groups) {
    const Tensor<T>& xv = value(x);
    kernels::require_matrix(xv, "group_mean input");
    if (groups.empty()) throw ShapeError("group_mean: no groups");
    const std::size_t d = xv.dim(1);
    Tensor<T> out(Shape{groups.size(), d});
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        const auto& rows = groups[gi];
        if (rows.empty()) throw ShapeError("group_mean: group " + std::to_string(gi) + " is empty");
        for (std::size_t r : rows) {
            if (r >= xv.dim(0)) throw ShapeError("group_mean: row out of range");
            for (std::size_t k = 0; k < d; ++k) out[gi * d + k] += xv[r * d + k];
        }
        const T n = static_cast<T>(rows.size());
        for (std::size_t k = 0; k < d; ++k) out[gi * d + k] /= n;
    }
    return push(OpKind::GroupMean, {x}, std::move(out), [x, d, groups = std::move(groups)](Graph& g, NodeId self) {
        const Tensor<T> up = g.nodes_[self].adjoint;
        Tensor<T>& gx = g.grad_of(x);
        for (std::size_t gi = 0; gi < groups.size(); ++gi) {
            const T inv = T{1} / static_cast<T>(groups[gi].size());
            for (std::size_t r : groups[gi])
                for (std::size_t k = 0; k < d; ++k) gx[r * d + k] += inv * up[gi * d + k];
        }
    });
}

template <typename T>
NodeId Graph<T>::sq_distance(NodeId a, NodeId b) {
    Tensor<T> out = kernels::sq_euclidean(value(a), value(b));
    return push(OpKind::SqDistance, {a, b}, std::move(out), [a, b](Graph& g, NodeId self) {
        const Tensor<T> up = g.nodes_[self].adjoint;
        const Tensor<T>& av = g.value(a);
        const Tensor<T>& bv = g.value(b);
        const std::size_t q = av.dim(0), c = bv.dim(0), d = av.dim(1);
        Tensor<T>& ga = g.grad_of(a);
        Tensor<T>& gb = g.grad_of(b);
        for (std::size_t i = 0; i < q; ++i) {
            for (std::size_t j = 0; j < c; ++j) {
                const T w = T{2} * up[i * c + j];
                if (w == T{0}) continue;
                for (std::size_t k = 0; k < d; ++k) {
                    const T diff = av[i * d + k] - bv[j * d + k];
                    ga[i * d + k] += w * diff;
                    gb[j * d + k] -= w * diff;
                }
            }
        }
    });
}

template <typename T>
NodeId Graph<T>::distance(NodeId a, NodeId b) {
    Tensor<T> out = kernels::euclidean(value(a), value(b));
    std::uint64_t h = 1469598103934665603ULL;
    for (T v : out.data()) {
        const unsigned char zero = v == T{0};
        h = fnv_bytes(h, &zero, 1);
    }
    record(h);
    return push(OpKind::Distance, {a, b}, std::move(out), [a, b](Graph& g, NodeId self) {
        const Tensor<T> up = g.nodes_[self].adjoint;
        const Tensor<T>& dist = g.nodes_[self].value;
        const Tensor<T>& av = g.value(a);
        const Tensor<T>& bv = g.value(b);
        const std::size_t q = av.dim(0), c = bv.dim(0), d = av.dim(1);
        Tensor<T>& ga = g.grad_of(a);
        Tensor<T>& gb = g.grad_of(b);
        for (std::size_t i = 0; i < q; ++i) {
            for (std::size_t j = 0; j < c; ++j) {
                const T dv = dist[i * c + j];
                if (dv == T{0} || up[i * c + j] == T{0}) continue;
                const T w = up[i * c + j] / dv;
                for (std::size_t k = 0; k < d; ++k) {
                    const T diff = av[i * d + k] - bv[j * d + k];
                    ga[i * d + k] += w * diff;
                    gb[j * d + k] -= w * diff;
                }
            }
        }
    });
}

template <typename T>
NodeId Graph<T>::reduce_extreme(NodeId x, bool take_max) {
    const Tensor<T>& xv = value(x);
    const std::size_t at = take_max ? kernels::argmax(xv.data()) : kernels::argmin(xv.data());
    record(static_cast<std::uint64_t>(at) + (take_max ? 0x9e3779b97f4a7c15ULL : 0x7f4a7c159e3779b9ULL));
    return push(take_max ? OpKind::ReduceMax : OpKind::ReduceMin, {x}, Tensor<T>::scalar(xv[at]),
                [x, at](Graph& g, NodeId self) { g.grad_of(x)[at] += g.nodes_[self].adjoint[0]; });
}

template <typename T>
NodeId Graph<T>::reduce_max(NodeId x) {
    return reduce_extreme(x, true);
}

template <typename T>
NodeId Graph<T>::reduce_min(NodeId x) {
    return reduce_extreme(x, false);
}

template <typename T>
NodeId Graph<T>::softmax_cross_entropy(NodeId logits, std::vector<std::size_t> labels, T log_floor) {
    const Tensor<T>& lv = value(logits);
    kernels::require_matrix(lv, "softmax_cross_entropy logits");
    const std::size_t n = lv.dim(0), c = lv.dim(1);
    if (labels.size() != n) {
        throw ShapeError("softmax_cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(n) + " rows");
    }
    Tensor<T> probs = kernels::softmax_rows(lv);
    T total{0};
    std::vector<unsigned char> clamped(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] >= c) throw InvalidArgument("softmax_cross_entropy: label out of range");
        const T p = probs[i * c + labels[i]];
        if (p < log_floor) clamped[i] = 1;
        total -= std::log(std::max(p, log_floor));
    }
    record(fnv_bytes(1469598103934665603ULL, clamped.data(), clamped.size()));
    return push(OpKind::SoftmaxCrossEntropy, {logits}, Tensor<T>::scalar(total / static_cast<T>(n)),
                [logits, n, c, probs = std::move(probs), labels = std::move(labels),
                 clamped = std::move(clamped)](Graph& g, NodeId self) {
                    const T up = g.nodes_[self].adjoint[0] / static_cast<T>(n);
                    Tensor<T>& gl = g.grad_of(logits);
                    for (std::size_t i = 0; i < n; ++i) {
                        if (clamped[i]) continue;
                        for (std::size_t j = 0; j < c; ++j) {
                            const T onehot = j == labels[i] ? T{1} : T{0};
                            gl[i * c + j] += up * (probs[i * c + j] - onehot);
                        }
                    }
                });
}

template <typename T>
Gradients<T> Graph<T>::backward(NodeId loss) {
    if (loss >= nodes_.size()) throw InvalidArgument("loss node id out of range");
    if (nodes_[loss].value.size() != 1) {
        throw ShapeError("backward requires a scalar loss, node #" + std::to_string(loss) + " has shape " +
                         shape_str(nodes_[loss].value.shape()));
    }
    for (auto& n : nodes_) n.adjoint = Tensor<T>{};

    std::vector<char> reaches(loss + 1, 0);
    reaches[loss] = 1;
    for (NodeId id = loss + 1; id-- > 0;) {
        if (!reaches[id]) continue;
        for (NodeId p : nodes_[id].parents) reaches[p] = 1;
    }

    grad_of(loss)[0] = T{1};
    for (NodeId id = loss + 1; id-- > 0;) {
        if (!reaches[id]) continue;
        grad_of(id);
        check_node(id, nodes_[id].adjoint, "adjoint");
        if (nodes_[id].backward) nodes_[id].backward(*this, id);
    }

    Gradients<T> grads;
    if (params_ != nullptr) {
        grads.reserve(params_->size());
        for (const auto& p : params_->entries()) grads.emplace_back(p.value.shape());
        for (NodeId id = 0; id <= loss; ++id) {
            const Node& n = nodes_[id];
            if (n.kind != OpKind::Parameter || !reaches[id]) continue;
            Tensor<T>& dst = grads[n.param];
            for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += n.adjoint[i];
        }
    }
    return grads;
}

template class Graph<float>;
template class Graph<double>;
template class ParameterStore<float>;
template class ParameterStore<double>;

}  // namespace fsl
