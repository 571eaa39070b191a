#include "fsl/embedding_store.hpp"

#include "fsl/error.hpp"

namespace fsl {

void FrozenEmbeddingStore::insert(std::string id, std::vector<float> vector) {
    if (vector.size() != source_dim_) {
        throw InvalidArgument("embedding '" + id + "' has length " + std::to_string(vector.size()) +
                              ", store dim is " + std::to_string(source_dim_));
    }
    if (lookup_.count(id)) throw InvalidArgument("duplicate embedding id '" + id + "'");
    lookup_.emplace(id, ids_.size());
    ids_.push_back(std::move(id));
    vectors_.push_back(std::move(vector));
}

const std::vector<float>* FrozenEmbeddingStore::find(const std::string& id) const {
    auto it = lookup_.find(id);
    return it == lookup_.end() ? nullptr : &vectors_[it->second];
}

}  // namespace fsl
