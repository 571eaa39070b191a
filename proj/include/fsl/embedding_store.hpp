#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace fsl {

// Precomputed backbone embeddings keyed by sample id. Insertion order is
// kept so that serialization is reproducible.
class FrozenEmbeddingStore {
public:
    FrozenEmbeddingStore() = default;
    FrozenEmbeddingStore(std::size_t source_dim, std::string provenance)
        : source_dim_(source_dim), provenance_(std::move(provenance)) {}

    // Throws InvalidArgument on a duplicate id or wrong vector length.
    void insert(std::string id, std::vector<float> vector);

    std::size_t size() const noexcept { return ids_.size(); }
    std::size_t source_dim() const noexcept { return source_dim_; }
    const std::string& provenance() const noexcept { return provenance_; }

    const std::vector<std::string>& ids() const noexcept { return ids_; }
    const std::vector<float>& vector_at(std::size_t i) const { return vectors_.at(i); }

    // nullptr when the id is unknown.
    const std::vector<float>* find(const std::string& id) const;

    bool operator==(const FrozenEmbeddingStore& other) const {
        return source_dim_ == other.source_dim_ && provenance_ == other.provenance_ && ids_ == other.ids_ &&
               vectors_ == other.vectors_;
    }

private:
    std::size_t source_dim_ = 0;
    std::string provenance_;
    std::vector<std::string> ids_;
    std::vector<std::vector<float>> vectors_;
    std::unordered_map<std::string, std::size_t> lookup_;
};

}  // namespace fsl
