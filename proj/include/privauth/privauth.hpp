#ifndef PRIVAUTH_PRIVAUTH_HPP
#define PRIVAUTH_PRIVAUTH_HPP

#include "privauth/actors.hpp"
#include "privauth/bytes.hpp"
#include "privauth/errors.hpp"
#include "privauth/fixed_point.hpp"
#include "privauth/group.hpp"
#include "privauth/metrics.hpp"
#include "privauth/modp_group.hpp"
#include "privauth/oprf.hpp"
#include "privauth/privacy.hpp"
#include "privauth/risk.hpp"
#include "privauth/rng.hpp"
#include "privauth/simnet.hpp"
#include "privauth/token.hpp"
#include "privauth/transport.hpp"
#include "privauth/vault.hpp"
#include "privauth/wire.hpp"

#endif // PRIVAUTH_PRIVAUTH_HPP
