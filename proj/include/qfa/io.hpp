#ifndef QFA_IO_HPP
#define QFA_IO_HPP

#include <optional>
#include <string>

#include "qfa/classical.hpp"
#include "qfa/constructions.hpp"
#include "qfa/qfa_core.hpp"

namespace qfa {

// One versioned document; exactly one of the payloads is present, keyed by
// `kind` (mo | mm | dfa | pfa | linsys).  MM documents may carry a
// certificate; mo/mm documents may carry a designated left-end-marker
// matrix for the stripping constructions.
struct AutomatonFile {
    std::string kind;
    std::optional<MoQfa> mo;
    std::optional<MmQfa> mm;
    std::optional<Dfa> dfa;
    std::optional<Pfa> pfa;
    std::optional<LinearSystem> linsys;
    std::optional<Certificate> cert;
    std::optional<CMatrix> cent;
};

std::string serialize(const AutomatonFile& f);
AutomatonFile deserialize(const std::string& text);

void save_file(const std::string& path, const AutomatonFile& f);
AutomatonFile load_file(const std::string& path);

AutomatonFile wrap(const MoQfa& m);
AutomatonFile wrap(const MmQfa& m, std::optional<Certificate> cert = std::nullopt);
AutomatonFile wrap(const Dfa& d);
AutomatonFile wrap(const Pfa& p);
AutomatonFile wrap(const LinearSystem& s);

// Example gallery.
MoQfa example_rotation();          // 2-state rotation by arccos(3/5)
MoQfa example_rotation(double ca, double sa);
MoQfa example_free_group();        // word problem for the free group on two generators
Dfa example_parity();              // 2-state GFA over {a}
AutomatonFile example_endmark_demo();  // MM automaton with a designated cent matrix

}  // namespace qfa

#endif
