#include "rankrl/agents.hpp"

#include <algorithm>
#include <stdexcept>

#include "rankrl/tensor_store.hpp"

namespace rankrl {

namespace {

// Embeddings of all candidates as columns; computed once per episode and
// shared across steps.
Matrix embed_all(const DenseParams& embed, const Query& query) {
    const int n = static_cast<int>(query.candidates.size());
    Matrix features(embed.in_dim(), n);
    for (int j = 0; j < n; ++j) {
        const Vector& f = query.candidates[static_cast<std::size_t>(j)].features;
        if (f.size() != embed.in_dim())
            throw std::invalid_argument("document of query " + query.id + " has " +
                                        std::to_string(f.size()) + " features, model expects " +
                                        std::to_string(embed.in_dim()));
        features.col(j) = f;
    }
    return relu(dense_forward(embed, features));
}

int index_of(const std::vector<int>& actions, int value, const std::string& what) {
    auto it = std::find(actions.begin(), actions.end(), value);
    if (it == actions.end())
        throw std::invalid_argument("episode takes " + what + " " + std::to_string(value) +
                                    " which is not legal at this step");
    return static_cast<int>(it - actions.begin());
}

Matrix columns(const Matrix& m, const std::vector<int>& idx) {
    Matrix out(m.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j)
        out.col(static_cast<Eigen::Index>(j)) = m.col(idx[j]);
    return out;
}

// Document scores of the dual-rank agent for a candidate subset: the trunk
// splits into a shared state part and a per-candidate embedding part.
Vector dual_doc_scores(const DualRankParams& p, const Vector& h, const Matrix& embeds,
                       const std::vector<int>& avail) {
    const int hidden = p.dims.hidden_dim;
    const auto& W = p.doc_head.proj.W;
    Vector shared = W.leftCols(hidden) * h + p.doc_head.proj.b.col(0);
    Matrix trunk = relu(Matrix((W.rightCols(p.dims.embed_dim) * columns(embeds, avail)).colwise() +
                               shared));
    Vector scores = (p.doc_head.v.col(0).transpose() * trunk).transpose();
    scores.array() += p.doc_head.u(0, 0);
    return scores;
}

Vector concat_state_embed(const Vector& h, const Vector& d_hat) {
    Vector cv(h.size() + d_hat.size());
    cv << h, d_hat;
    return cv;
}

}  // namespace

QHead init_q_head(int in_dim, int head_dim, Rng& rng) {
    QHead head;
    head.proj = init_dense(head_dim, in_dim, rng);
    head.v = glorot_uniform(head_dim, 1, rng);
    head.u = Matrix::Zero(1, 1);
    return head;
}

QHead zeros_like(const QHead& head) {
    return {zeros_like(head.proj), Matrix::Zero(head.v.rows(), 1), Matrix::Zero(1, 1)};
}

double q_head_value(const QHead& head, const Vector& x) {
    Vector r = relu(dense_forward(head.proj, x));
    return head.v.col(0).dot(r) + head.u(0, 0);
}

Vector q_head_values(const QHead& head, const Matrix& X) {
    Matrix trunk = relu(dense_forward(head.proj, X));
    Vector scores = (head.v.col(0).transpose() * trunk).transpose();
    scores.array() += head.u(0, 0);
    return scores;
}

std::vector<TensorRef> GruAgentParams::tensors() {
    std::vector<TensorRef> refs = {{"embed.W", &embed.W}, {"embed.b", &embed.b}};
    auto g = gru.tensors("gru");
    refs.insert(refs.end(), g.begin(), g.end());
    refs.push_back({"head.W", &head.proj.W});
    refs.push_back({"head.b", &head.proj.b});
    refs.push_back({"head.v", &head.v});
    refs.push_back({"head.u", &head.u});
    return refs;
}

std::vector<ConstTensorRef> GruAgentParams::tensors() const {
    std::vector<ConstTensorRef> refs = {{"embed.W", &embed.W}, {"embed.b", &embed.b}};
    auto g = gru.tensors("gru");
    refs.insert(refs.end(), g.begin(), g.end());
    refs.push_back({"head.W", &head.proj.W});
    refs.push_back({"head.b", &head.proj.b});
    refs.push_back({"head.v", &head.v});
    refs.push_back({"head.u", &head.u});
    return refs;
}

GruAgentParams init_gru_agent(const ModelDims& dims, Rng& rng) {
    if (dims.feature_count < 1) throw std::invalid_argument("feature_count must be >= 1");
    GruAgentParams p;
    p.dims = dims;
    p.embed = init_dense(dims.embed_dim, dims.feature_count, rng);
    p.gru = init_gru(dims.hidden_dim, dims.embed_dim, rng, dims.candidate_input);
    p.head = init_q_head(dims.hidden_dim, dims.head_dim, rng);
    return p;
}

GruAgentParams zeros_like(const GruAgentParams& params) {
    GruAgentParams g;
    g.dims = params.dims;
    g.embed = zeros_like(params.embed);
    g.gru = zeros_like(params.gru);
    g.head = zeros_like(params.head);
    return g;
}

std::vector<TensorRef> DualRankParams::tensors() {
    std::vector<TensorRef> refs = {{"embed.W", &embed.W}, {"embed.b", &embed.b}};
    auto g = gru.tensors("gru");
    refs.insert(refs.end(), g.begin(), g.end());
    refs.push_back({"doc_head.W", &doc_head.proj.W});
    refs.push_back({"doc_head.b", &doc_head.proj.b});
    refs.push_back({"doc_head.v", &doc_head.v});
    refs.push_back({"doc_head.u", &doc_head.u});
    refs.push_back({"pos_head.W", &pos_proj.W});
    refs.push_back({"pos_head.b", &pos_proj.b});
    refs.push_back({"pos_head.v", &pos_v});
    refs.push_back({"pos_head.u", &pos_u});
    return refs;
}

std::vector<ConstTensorRef> DualRankParams::tensors() const {
    std::vector<ConstTensorRef> refs = {{"embed.W", &embed.W}, {"embed.b", &embed.b}};
    auto g = gru.tensors("gru");
    refs.insert(refs.end(), g.begin(), g.end());
    refs.push_back({"doc_head.W", &doc_head.proj.W});
    refs.push_back({"doc_head.b", &doc_head.proj.b});
    refs.push_back({"doc_head.v", &doc_head.v});
    refs.push_back({"doc_head.u", &doc_head.u});
    refs.push_back({"pos_head.W", &pos_proj.W});
    refs.push_back({"pos_head.b", &pos_proj.b});
    refs.push_back({"pos_head.v", &pos_v});
    refs.push_back({"pos_head.u", &pos_u});
    return refs;
}

DualRankParams init_dualrank_agent(const ModelDims& dims, int k, Rng& rng) {
    if (dims.feature_count < 1) throw std::invalid_argument("feature_count must be >= 1");
    if (k < 1) throw std::invalid_argument("page size k must be >= 1");
    DualRankParams p;
    p.dims = dims;
    p.k = k;
    p.embed = init_dense(dims.embed_dim, dims.feature_count, rng);
    p.gru = init_gru(dims.hidden_dim, dims.embed_dim + 1, rng, dims.candidate_input);
    p.doc_head = init_q_head(dims.hidden_dim + dims.embed_dim, dims.head_dim, rng);
    p.pos_proj = init_dense(dims.head_dim, dims.hidden_dim + dims.embed_dim, rng);
    p.pos_v = glorot_uniform(dims.head_dim, k, rng);
    p.pos_u = Matrix::Zero(k, 1);
    return p;
}

DualRankParams zeros_like(const DualRankParams& params) {
    DualRankParams g;
    g.dims = params.dims;
    g.k = params.k;
    g.embed = zeros_like(params.embed);
    g.gru = zeros_like(params.gru);
    g.doc_head = zeros_like(params.doc_head);
    g.pos_proj = zeros_like(params.pos_proj);
    g.pos_v = Matrix::Zero(params.pos_v.rows(), params.pos_v.cols());
    g.pos_u = Matrix::Zero(params.pos_u.rows(), 1);
    return g;
}

Vector embed_document(const DenseParams& embed, const Vector& features) {
    return relu(dense_forward(embed, features));
}

std::pair<double, Vector> gru_q_value(const GruAgentParams& params, const Vector& h_prev,
                                      const Vector& d_hat) {
    Vector h = gru_forward(params.gru, h_prev, d_hat);
    return {q_head_value(params.head, h), std::move(h)};
}

double dualrank_doc_q(const DualRankParams& params, const Vector& h_prev, const Vector& d_hat) {
    return q_head_value(params.doc_head, concat_state_embed(h_prev, d_hat));
}

Vector dualrank_pos_q(const DualRankParams& params, const Vector& h_prev, const Vector& d_hat,
                      const std::vector<int>& available_positions) {
    if (available_positions.empty())
        throw std::invalid_argument("no positions left to score");
    Vector trunk = relu(dense_forward(params.pos_proj, concat_state_embed(h_prev, d_hat)));
    Vector scores(static_cast<Eigen::Index>(available_positions.size()));
    for (std::size_t i = 0; i < available_positions.size(); ++i) {
        const int pos = available_positions[i];
        if (pos < 1 || pos > params.k)
            throw std::invalid_argument("position " + std::to_string(pos) + " outside 1.." +
                                        std::to_string(params.k));
        scores[static_cast<Eigen::Index>(i)] =
            params.pos_v.col(pos - 1).dot(trunk) + params.pos_u(pos - 1, 0);
    }
    return scores;
}

double epsilon_at(const EpsilonSchedule& schedule, std::int64_t step) {
    if (step < 0) throw std::invalid_argument("negative step in epsilon schedule");
    if (step >= schedule.decay_steps) return schedule.end;
    const double frac = static_cast<double>(step) / static_cast<double>(schedule.decay_steps);
    return schedule.start + (schedule.end - schedule.start) * frac;
}

Episode run_gru_episode(const GruAgentParams& params, const Query& query, int query_index,
                        int k, const RankingEnv& env, double eps, Rng& rng,
                        RolloutStats* stats) {
    BaselineState state =
        make_baseline_state(static_cast<int>(query.candidates.size()), k);
    const Matrix embeds = embed_all(params.embed, query);
    Vector h = Vector::Zero(params.dims.hidden_dim);

    Episode episode;
    episode.query_id = query.id;
    episode.query_index = query_index;
    for (int t = 0; t < k; ++t) {
        const std::vector<int> avail = state.available_docs();
        int chosen;
        if (coinflip(eps, rng)) {
            chosen = avail[static_cast<std::size_t>(
                uniform_index(rng, static_cast<int>(avail.size())))];
            h = gru_forward(params.gru, h, embeds.col(chosen));
            if (stats) stats->gru_calls += 1;
        } else {
            Matrix H = gru_forward_batch(params.gru, h, columns(embeds, avail));
            const int best = argmax_index(q_head_values(params.head, H));
            chosen = avail[static_cast<std::size_t>(best)];
            h = H.col(best);
            if (stats) stats->gru_calls += static_cast<std::int64_t>(avail.size());
        }
        state = baseline_step(std::move(state), chosen);
        episode.doc_actions.push_back(chosen);
        episode.pos_actions.push_back(t + 1);
    }
    assign_rewards(episode, query, env);
    return episode;
}

Episode run_dualrank_episode(const DualRankParams& params, const Query& query, int query_index,
                             int k, const RankingEnv& env, double eps, Rng& rng,
                             RolloutStats* stats) {
    if (k != params.k)
        throw std::invalid_argument("agent built for k=" + std::to_string(params.k) +
                                    ", asked to fill " + std::to_string(k) + " slots");
    DualRankState state =
        make_dualrank_state(static_cast<int>(query.candidates.size()), k);
    const Matrix embeds = embed_all(params.embed, query);
    Vector h = Vector::Zero(params.dims.hidden_dim);

    Episode episode;
    episode.query_id = query.id;
    episode.query_index = query_index;
    episode.interleaved = true;
    for (int placement = 0; placement < k; ++placement) {
        const std::vector<int> avail_docs = state.available_docs();
        int doc;
        if (coinflip(eps, rng)) {
            doc = avail_docs[static_cast<std::size_t>(
                uniform_index(rng, static_cast<int>(avail_docs.size())))];
        } else {
            doc = avail_docs[static_cast<std::size_t>(
                argmax_index(dual_doc_scores(params, h, embeds, avail_docs)))];
        }
        state = dualrank_step(std::move(state), {ActionType::document, doc});

        const std::vector<int> avail_pos = state.available_positions();
        int pos;
        if (coinflip(eps, rng)) {
            pos = avail_pos[static_cast<std::size_t>(
                uniform_index(rng, static_cast<int>(avail_pos.size())))];
        } else {
            pos = avail_pos[static_cast<std::size_t>(
                argmax_index(dualrank_pos_q(params, h, embeds.col(doc), avail_pos)))];
        }
        state = dualrank_step(std::move(state), {ActionType::position, pos});

        Vector x(params.dims.embed_dim + 1);
        x << embeds.col(doc), static_cast<double>(pos);
        h = gru_forward(params.gru, h, x);
        if (stats) stats->gru_calls += 1;

        episode.doc_actions.push_back(doc);
        episode.pos_actions.push_back(pos);
    }
    assign_rewards(episode, query, env);
    return episode;
}

ReplayValues replay_forward(const GruAgentParams& params, const Episode& episode,
                            const Query& query) {
    const int k = episode.k();
    BaselineState state =
        make_baseline_state(static_cast<int>(query.candidates.size()), k);
    const Matrix embeds = embed_all(params.embed, query);
    Vector h = Vector::Zero(params.dims.hidden_dim);

    ReplayValues values;
    values.steps.reserve(static_cast<std::size_t>(k));
    for (int t = 0; t < k; ++t) {
        StepValues step;
        step.actions = state.available_docs();
        Matrix H = gru_forward_batch(params.gru, h, columns(embeds, step.actions));
        step.q = q_head_values(params.head, H);
        step.taken_index =
            index_of(step.actions, episode.doc_actions[static_cast<std::size_t>(t)], "document");
        h = H.col(step.taken_index);
        state = baseline_step(std::move(state),
                              episode.doc_actions[static_cast<std::size_t>(t)]);
        values.steps.push_back(std::move(step));
    }
    return values;
}

ReplayValues replay_forward(const DualRankParams& params, const Episode& episode,
                            const Query& query) {
    const int k = episode.k();
    DualRankState state =
        make_dualrank_state(static_cast<int>(query.candidates.size()), k);
    const Matrix embeds = embed_all(params.embed, query);
    Vector h = Vector::Zero(params.dims.hidden_dim);

    ReplayValues values;
    values.steps.reserve(static_cast<std::size_t>(2 * k));
    for (int placement = 0; placement < k; ++placement) {
        const int doc = episode.doc_actions[static_cast<std::size_t>(placement)];
        const int pos = episode.pos_actions[static_cast<std::size_t>(placement)];

        StepValues doc_step;
        doc_step.actions = state.available_docs();
        doc_step.q = dual_doc_scores(params, h, embeds, doc_step.actions);
        doc_step.taken_index = index_of(doc_step.actions, doc, "document");
        values.steps.push_back(std::move(doc_step));
        state = dualrank_step(std::move(state), {ActionType::document, doc});

        StepValues pos_step;
        pos_step.actions = state.available_positions();
        pos_step.q = dualrank_pos_q(params, h, embeds.col(doc), pos_step.actions);
        pos_step.taken_index = index_of(pos_step.actions, pos, "position");
        values.steps.push_back(std::move(pos_step));
        state = dualrank_step(std::move(state), {ActionType::position, pos});

        Vector x(params.dims.embed_dim + 1);
        x << embeds.col(doc), static_cast<double>(pos);
        h = gru_forward(params.gru, h, x);
    }
    return values;
}

namespace {

// Forward pass along the taken actions only, caching everything the
// backward pass needs. Shared by episode_loss and episode_loss_gradient so
// their values agree exactly.
struct GruTrace {
    std::vector<Vector> features, d_hat;
    std::vector<GruCache> caches;
    std::vector<Vector> h;          // state after each step
    std::vector<Vector> head_relu;  // head trunk per step
    std::vector<double> q;          // taken-action score per step
};

GruTrace gru_trace(const GruAgentParams& params, const Episode& episode, const Query& query) {
    const int k = episode.k();
    if (k == 0) throw std::invalid_argument("empty episode");
    GruTrace trace;
    Vector h = Vector::Zero(params.dims.hidden_dim);
    for (int t = 0; t < k; ++t) {
        const int doc = episode.doc_actions[static_cast<std::size_t>(t)];
        if (doc < 0 || doc >= static_cast<int>(query.candidates.size()))
            throw std::invalid_argument("episode references unknown document " +
                                        std::to_string(doc));
        const Vector& f = query.candidates[static_cast<std::size_t>(doc)].features;
        trace.features.push_back(f);
        trace.d_hat.push_back(embed_document(params.embed, f));
        GruCache cache;
        h = gru_forward(params.gru, h, trace.d_hat.back(), &cache);
        trace.caches.push_back(std::move(cache));
        trace.h.push_back(h);
        Vector r = relu(dense_forward(params.head.proj, h));
        trace.q.push_back(params.head.v.col(0).dot(r) + params.head.u(0, 0));
        trace.head_relu.push_back(std::move(r));
    }
    return trace;
}

double squared_error(const std::vector<double>& q, const std::vector<double>& targets) {
    if (q.size() != targets.size())
        throw std::invalid_argument("expected " + std::to_string(q.size()) + " targets, got " +
                                    std::to_string(targets.size()));
    double loss = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        const double e = q[i] - targets[i];
        loss += e * e;
    }
    return loss;
}

struct DualTrace {
    std::vector<Vector> features, d_hat;
    std::vector<Vector> concat;    // [h_prev, d_hat] per placement
    std::vector<Vector> doc_relu;  // doc-head trunk per placement
    std::vector<Vector> pos_relu;  // pos-head trunk per placement
    std::vector<GruCache> caches;  // one roll per placement
    std::vector<double> q;         // 2k values, document step then position step
};

DualTrace dual_trace(const DualRankParams& params, const Episode& episode, const Query& query) {
    const int k = episode.k();
    if (k == 0) throw std::invalid_argument("empty episode");
    if (episode.pos_actions.size() != static_cast<std::size_t>(k))
        throw std::invalid_argument("episode documents and positions disagree in length");
    DualTrace trace;
    Vector h = Vector::Zero(params.dims.hidden_dim);
    for (int i = 0; i < k; ++i) {
        const int doc = episode.doc_actions[static_cast<std::size_t>(i)];
        const int pos = episode.pos_actions[static_cast<std::size_t>(i)];
        if (doc < 0 || doc >= static_cast<int>(query.candidates.size()))
            throw std::invalid_argument("episode references unknown document " +
                                        std::to_string(doc));
        if (pos < 1 || pos > params.k)
            throw std::invalid_argument("episode references position " + std::to_string(pos) +
                                        " outside 1.." + std::to_string(params.k));
        const Vector& f = query.candidates[static_cast<std::size_t>(doc)].features;
        trace.features.push_back(f);
        trace.d_hat.push_back(embed_document(params.embed, f));
        trace.concat.push_back(concat_state_embed(h, trace.d_hat.back()));

        Vector rd = relu(dense_forward(params.doc_head.proj, trace.concat.back()));
        trace.q.push_back(params.doc_head.v.col(0).dot(rd) + params.doc_head.u(0, 0));
        trace.doc_relu.push_back(std::move(rd));

        Vector rp = relu(dense_forward(params.pos_proj, trace.concat.back()));
        trace.q.push_back(params.pos_v.col(pos - 1).dot(rp) + params.pos_u(pos - 1, 0));
        trace.pos_relu.push_back(std::move(rp));

        Vector x(params.dims.embed_dim + 1);
        x << trace.d_hat.back(), static_cast<double>(pos);
        GruCache cache;
        h = gru_forward(params.gru, h, x, &cache);
        trace.caches.push_back(std::move(cache));
    }
    return trace;
}

}  // namespace

double episode_loss(const GruAgentParams& params, const Episode& episode, const Query& query,
                    const std::vector<double>& targets) {
    return squared_error(gru_trace(params, episode, query).q, targets);
}

double episode_loss_gradient(const GruAgentParams& params, const Episode& episode,
                             const Query& query, const std::vector<double>& targets,
                             GruAgentParams& grads) {
    GruTrace trace = gru_trace(params, episode, query);
    const double loss = squared_error(trace.q, targets);

    const int k = episode.k();
    Vector dh_chain = Vector::Zero(params.dims.hidden_dim);
    for (int t = k - 1; t >= 0; --t) {
        const auto ti = static_cast<std::size_t>(t);
        const double dq = 2.0 * (trace.q[ti] - targets[ti]);

        grads.head.v.col(0) += dq * trace.head_relu[ti];
        grads.head.u(0, 0) += dq;
        Vector dtrunk = relu_backward(dq * params.head.v.col(0), trace.head_relu[ti]);
        Vector dh = dense_backward(params.head.proj, trace.h[ti], dtrunk, grads.head.proj);
        dh += dh_chain;

        Vector dh_prev, dx;
        gru_backward(params.gru, trace.caches[ti], dh, grads.gru, dh_prev, dx);

        Vector dembed = relu_backward(dx, trace.d_hat[ti]);
        dense_backward(params.embed, trace.features[ti], dembed, grads.embed);
        dh_chain = std::move(dh_prev);
    }
    return loss;
}

double episode_loss(const DualRankParams& params, const Episode& episode, const Query& query,
                    const std::vector<double>& targets) {
    return squared_error(dual_trace(params, episode, query).q, targets);
}

double episode_loss_gradient(const DualRankParams& params, const Episode& episode,
                             const Query& query, const std::vector<double>& targets,
                             DualRankParams& grads) {
    DualTrace trace = dual_trace(params, episode, query);
    const double loss = squared_error(trace.q, targets);

    const int k = episode.k();
    const int hidden = params.dims.hidden_dim;
    const int embed_dim = params.dims.embed_dim;
    Vector dh_after = Vector::Zero(hidden);  // gradient w.r.t. the post-placement state
    for (int i = k - 1; i >= 0; --i) {
        const auto pi = static_cast<std::size_t>(i);
        const int pos = episode.pos_actions[pi];

        Vector dh_prev, dx;
        gru_backward(params.gru, trace.caches[pi], dh_after, grads.gru, dh_prev, dx);
        Vector dd_hat = dx.head(embed_dim);  // the position coordinate is a constant input

        const double dq_doc = 2.0 * (trace.q[2 * pi] - targets[2 * pi]);
        grads.doc_head.v.col(0) += dq_doc * trace.doc_relu[pi];
        grads.doc_head.u(0, 0) += dq_doc;
        Vector dtrunk_doc =
            relu_backward(dq_doc * params.doc_head.v.col(0), trace.doc_relu[pi]);
        Vector dconcat =
            dense_backward(params.doc_head.proj, trace.concat[pi], dtrunk_doc,
                           grads.doc_head.proj);

        const double dq_pos = 2.0 * (trace.q[2 * pi + 1] - targets[2 * pi + 1]);
        grads.pos_v.col(pos - 1) += dq_pos * trace.pos_relu[pi];
        grads.pos_u(pos - 1, 0) += dq_pos;
        Vector dtrunk_pos =
            relu_backward(dq_pos * params.pos_v.col(pos - 1), trace.pos_relu[pi]);
        dconcat += dense_backward(params.pos_proj, trace.concat[pi], dtrunk_pos, grads.pos_proj);

        dh_prev += dconcat.head(hidden);
        dd_hat += dconcat.tail(embed_dim);

        Vector dembed = relu_backward(dd_hat, trace.d_hat[pi]);
        dense_backward(params.embed, trace.features[pi], dembed, grads.embed);
        dh_after = std::move(dh_prev);
    }
    return loss;
}

namespace {

const char* candidate_input_name(CandidateInput ci) {
    return ci == CandidateInput::hidden_state ? "hidden_state" : "input_vector";
}

CandidateInput candidate_input_from(const std::string& name) {
    if (name == "hidden_state") return CandidateInput::hidden_state;
    if (name == "input_vector") return CandidateInput::input_vector;
    throw std::runtime_error("unknown gru_candidate_input value: " + name);
}

nlohmann::json dims_meta(const ModelDims& dims) {
    return {{"feature_count", dims.feature_count},
            {"embed_dim", dims.embed_dim},
            {"hidden_dim", dims.hidden_dim},
            {"head_dim", dims.head_dim},
            {"gru_candidate_input", candidate_input_name(dims.candidate_input)}};
}

ModelDims dims_from_meta(const nlohmann::json& meta) {
    ModelDims dims;
    dims.feature_count = meta.at("feature_count").get<int>();
    dims.embed_dim = meta.at("embed_dim").get<int>();
    dims.hidden_dim = meta.at("hidden_dim").get<int>();
    dims.head_dim = meta.at("head_dim").get<int>();
    dims.candidate_input =
        candidate_input_from(meta.at("gru_candidate_input").get<std::string>());
    return dims;
}

void copy_tensors(const TensorFile& file, const std::vector<TensorRef>& into,
                  const std::string& path) {
    for (const auto& ref : into) {
        auto it = file.tensors.find(ref.name);
        if (it == file.tensors.end())
            throw std::runtime_error("checkpoint " + path + " lacks tensor " + ref.name);
        if (it->second.rows() != ref.value->rows() || it->second.cols() != ref.value->cols())
            throw std::runtime_error("checkpoint " + path + " has wrong shape for " + ref.name);
        *ref.value = it->second;
    }
}

}  // namespace

void save_agent(const std::string& path, const GruAgentParams& params) {
    nlohmann::json meta = dims_meta(params.dims);
    meta["agent"] = "gru";
    save_tensors(path, meta, params.tensors());
}

void save_agent(const std::string& path, const DualRankParams& params) {
    nlohmann::json meta = dims_meta(params.dims);
    meta["agent"] = "dualrank";
    meta["k"] = params.k;
    save_tensors(path, meta, params.tensors());
}

std::string peek_agent_kind(const std::string& path) {
    return load_tensors(path).meta.at("agent").get<std::string>();
}

GruAgentParams load_gru_agent(const std::string& path) {
    TensorFile file = load_tensors(path);
    if (file.meta.at("agent") != "gru")
        throw std::runtime_error("checkpoint " + path + " holds a " +
                                 file.meta.at("agent").get<std::string>() +
                                 " agent, expected gru");
    Rng dummy(0);
    GruAgentParams params = init_gru_agent(dims_from_meta(file.meta), dummy);
    copy_tensors(file, params.tensors(), path);
    return params;
}

DualRankParams load_dualrank_agent(const std::string& path) {
    TensorFile file = load_tensors(path);
    if (file.meta.at("agent") != "dualrank")
        throw std::runtime_error("checkpoint " + path + " holds a " +
                                 file.meta.at("agent").get<std::string>() +
                                 " agent, expected dualrank");
    Rng dummy(0);
    DualRankParams params =
        init_dualrank_agent(dims_from_meta(file.meta), file.meta.at("k").get<int>(), dummy);
    copy_tensors(file, params.tensors(), path);
    return params;
}

}  // namespace rankrl
