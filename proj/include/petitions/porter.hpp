#ifndef PETITIONS_PORTER_HPP
#define PETITIONS_PORTER_HPP

#include <string>
#include <string_view>

namespace petitions {

/// Porter suffix-stripping stemmer, following Martin Porter's reference C
/// implementation (including its `bli`/`logi` step-2 rules). Expects a
/// lowercase word; words of one or two characters are returned unchanged.
std::string porter_stem(std::string_view word);

} // namespace petitions

#endif
