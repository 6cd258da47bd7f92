#pragma once

#include <map>
#include <string>

namespace qcrb {

enum class BoundKind {
    sld,
    rld,
    hcrb,
    nhcrb,
    gmcrb,
    nhcrb_upper_suzuki,
    micrb_upper,
    hcrb_lower,
    nhcrb_upper_mm,
    classical,
};

enum class BoundMethod { closed_form, sdp, feasible_point, inequality };

const char* to_string(BoundKind k);
const char* to_string(BoundMethod m);

struct BoundReport {
    BoundKind kind = BoundKind::sld;
    double value = 0;
    BoundMethod method = BoundMethod::closed_form;
    double gap = 0;  // SDP duality gap where applicable
    std::map<std::string, double> residuals;
    double theta_correction = 0;  // the subtracted theta^T W theta

    std::string to_json() const;
};

}  // namespace qcrb
