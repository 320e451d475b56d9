"""Built-in instrumented SUTs for desk-scale experiments.

Three services ship with the fuzzer:

* ``ncs``  - six functions over nested numeric branching,
* ``scs``  - eleven functions over string matching (one of them gated on
  pre-existing store rows, so it stays partly uncoverable until seed data
  is loaded),
* ``authdemo`` - a small login/token service exercising dynamic auth and
  response categorization.

Bodies are deterministic given (args, store state). Predicates go through
the probe registry so the search sees branch distances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Optional

from ..execution import FrameworkFault, ServiceFault, WrappedFault
from ..fitness import ExceptionType
from ..schema.model import AuthMode, AuthSpec, RpcSchema
from ..schema.thrift import parse_thrift_idl
from .probes import ProbeRegistry
from .store import SimTableStore


class ServiceContext:
    """What a function body sees: the store, the probes and the auth fields."""

    def __init__(self, store: SimTableStore, probes: ProbeRegistry, auth: dict):
        self.store = store
        self.probes = probes
        self.auth = auth

    def num(self, probe_id: str, lhs: float, rhs: float, op: str) -> bool:
        return self.probes.cmp_num(probe_id, lhs, rhs, op)

    def eq(self, probe_id: str, lhs: str, rhs: str) -> bool:
        return self.probes.cmp_str(probe_id, lhs, rhs)


@dataclass
class SimulatedService:
    name: str
    schema: RpcSchema
    store: SimTableStore
    probes: ProbeRegistry
    bodies: dict[str, Callable]
    default_auth: Optional[AuthSpec] = None
    default_categorizer: Optional[str] = None
    description: str = ""

    def invoke(self, action_name: str, args: list, auth: dict) -> Any:
        body = self.bodies.get(action_name)
        if body is None:
            raise FrameworkFault(ExceptionType.APP_UNKNOWN_METHOD,
                                 f"no function {action_name!r}")
        ctx = ServiceContext(self.store, self.probes, auth or {})
        return body(ctx, *args)

    def reset_state(self) -> None:
        self.store.smart_reset()

    def function_count(self) -> int:
        return sum(len(i.functions) for i in self.schema.interfaces)


# --- numeric service ---------------------------------------------------------------

NCS_IDL = """
namespace java org.example.ncs

struct Dto {
  1: i32 resultAsInt,
  2: double resultAsDouble
}

exception BadInput {
  1: string reason
}

service NcsService {
  Dto bessj(1: i32 n, 2: double x)
  i32 triangle(1: i32 a, 2: i32 b, 3: i32 c)
  i32 remainder(1: i32 a, 2: i32 b)
  double expint(1: i32 n, 2: double x) throws (1: BadInput err)
  double fisher(1: i32 m, 2: i32 n, 3: double x) throws (1: BadInput err)
  double gammq(1: double a, 2: double x) throws (1: BadInput err)
}
"""


def _f(x) -> float:
    return 0.0 if x is None else float(x)


def _i(x) -> int:
    return 0 if x is None else int(x)


def _bessel_like(order: int, x: float) -> float:
    scaled = math.fmod(abs(x), 2.0 * math.pi)
    value = math.sin(scaled) / (1.0 + order + scaled)
    for _ in range(min(order, 12)):
        value = value * scaled / 2.0 - value / 3.0
    return value


def _ncs_bessj(ctx, n, x):
    n, x = _i(n), _f(x)
    if ctx.num("ncs.bessj.small_order", n, 2, "<"):
        if ctx.num("ncs.bessj.zero_order", n, 0, "=="):
            r = _bessel_like(0, x)
        else:
            r = _bessel_like(1, abs(x))
    elif ctx.num("ncs.bessj.zero_x", x, 0.0, "=="):
        r = 0.0
    elif ctx.num("ncs.bessj.upward", abs(x), float(n), ">"):
        r = _bessel_like(n, x)
    else:
        r = _bessel_like(n, x) / (n + 1.0)
    return {"resultAsInt": int(r), "resultAsDouble": r}


def _ncs_triangle(ctx, a, b, c):
    a, b, c = _i(a), _i(b), _i(c)
    if ctx.num("ncs.tri.a_pos", a, 0, "<=") or \
            ctx.num("ncs.tri.b_pos", b, 0, "<=") or \
            ctx.num("ncs.tri.c_pos", c, 0, "<="):
        return 0
    if ctx.num("ncs.tri.ineq_ab", a + b, c, "<=") or \
            ctx.num("ncs.tri.ineq_ac", a + c, b, "<=") or \
            ctx.num("ncs.tri.ineq_bc", b + c, a, "<="):
        return 0
    eq_ab = ctx.num("ncs.tri.eq_ab", a, b, "==")
    eq_bc = ctx.num("ncs.tri.eq_bc", b, c, "==")
    eq_ac = ctx.num("ncs.tri.eq_ac", a, c, "==")
    count = sum((eq_ab, eq_bc, eq_ac))
    if ctx.num("ncs.tri.equilateral", count, 3, "=="):
        return 3
    if ctx.num("ncs.tri.isosceles", count, 1, "=="):
        return 2
    return 1


def _ncs_remainder(ctx, a, b):
    a, b = _i(a), _i(b)
    if ctx.num("ncs.rem.zero_divisor", b, 0, "=="):
        # unguarded division: a genuine defect reachable only at b == 0
        return a % b
    if ctx.num("ncs.rem.neg_a", a, 0, "<"):
        if ctx.num("ncs.rem.neg_b", b, 0, "<"):
            return -(-a % -b)
        return -(-a % b)
    if ctx.num("ncs.rem.pos_neg", b, 0, "<"):
        return a % -b
    return a % b


def _ncs_expint(ctx, n, x):
    n, x = _i(n), _f(x)
    if ctx.num("ncs.exp.neg_order", n, 0, "<") or \
            ctx.num("ncs.exp.neg_x", x, 0.0, "<"):
        raise ServiceFault("BadInput", "order and x must be non-negative")
    if ctx.num("ncs.exp.zero_order", n, 0, "=="):
        if ctx.num("ncs.exp.zero_x", x, 0.0, "=="):
            raise ServiceFault("BadInput", "E0 undefined at x=0")
        return math.exp(-min(x, 700.0)) / x
    total = 1.0 / (n + x + 1.0)
    term = total
    for k in range(1, 9):
        term *= (x / (n + k + 1.0))
        total += term
        if ctx.num("ncs.exp.converged", abs(term), 1e-12, "<"):
            break
    return total


def _ncs_fisher(ctx, m, n, x):
    m, n, x = _i(m), _i(n), _f(x)
    if ctx.num("ncs.fis.m_pos", m, 0, "<=") or \
            ctx.num("ncs.fis.n_pos", n, 0, "<="):
        raise ServiceFault("BadInput", "degrees of freedom must be positive")
    if ctx.num("ncs.fis.neg_x", x, 0.0, "<"):
        return 0.0
    ratio = (m * x) / (m * x + n) if (m * x + n) != 0 else 0.0
    if ctx.num("ncs.fis.m_even", m % 2, 0, "=="):
        if ctx.num("ncs.fis.n_even", n % 2, 0, "=="):
            return ratio / 2.0
        return ratio / 3.0
    if ctx.num("ncs.fis.big_ratio", ratio, 0.5, ">"):
        return 1.0 - ratio
    return ratio


def _ncs_gammq(ctx, a, x):
    a, x = _f(a), _f(x)
    if ctx.num("ncs.gam.a_pos", a, 0.0, "<=") or \
            ctx.num("ncs.gam.neg_x", x, 0.0, "<"):
        raise ServiceFault("BadInput", "need a > 0 and x >= 0")
    if ctx.num("ncs.gam.series", x, a + 1.0, "<"):
        total, term = 1.0 / a, 1.0 / a
        for k in range(1, 12):
            term *= x / (a + k)
            total += term
        return min(1.0, abs(total) / (1.0 + abs(total)))
    spread = (x - a) / (abs(x) + abs(a) + 1.0)
    if ctx.num("ncs.gam.far_tail", spread, 0.99, ">"):
        return 0.0
    return 1.0 / (1.0 + spread)


def build_ncs_analog() -> SimulatedService:
    return SimulatedService(
        name="ncs",
        schema=parse_thrift_idl(NCS_IDL),
        store=SimTableStore(),
        probes=ProbeRegistry(),
        bodies={
            "bessj": _ncs_bessj,
            "triangle": _ncs_triangle,
            "remainder": _ncs_remainder,
            "expint": _ncs_expint,
            "fisher": _ncs_fisher,
            "gammq": _ncs_gammq,
        },
        description="numeric branching problems",
    )


# --- string service ----------------------------------------------------------------

SCS_IDL = """
namespace java org.example.scs

exception Rejected {
  1: string reason
}

service ScsService {
  double calc(1: string op, 2: double arg1, 3: double arg2)
  string cookie(1: string name, 2: string val, 3: string site)
  i32 dateRank(1: string dayname, 2: string monthname)
  string filePrefix(1: string prefix, 2: string path)
  string vaultOpen(1: string user, 2: string pin)
  i32 digitSum(1: string digits) throws (1: Rejected err)
  string title(1: string honorific, 2: string surname)
  string textBetween(1: string text, 2: string openTag, 3: string closeTag)
  list<string> splitWords(1: string text)
  i32 ordered(1: string a, 2: string b, 3: string c)
  string zipCheck(1: string zip) throws (1: Rejected err)
}
"""


def _s(x) -> str:
    return "" if x is None else str(x)


def _require(*args) -> None:
    """Null reference arguments fail protocol validation, like a real codec."""
    if any(a is None for a in args):
        raise FrameworkFault(ExceptionType.PROTO_INVALID_DATA, "null argument")


def _scs_calc(ctx, op, arg1, arg2):
    _require(op)
    op, a1, a2 = _s(op), _f(arg1), _f(arg2)
    if ctx.eq("scs.calc.add", op, "add"):
        return a1 + a2
    if ctx.eq("scs.calc.sub", op, "sub"):
        return a1 - a2
    if ctx.eq("scs.calc.mul", op, "mul"):
        return a1 * a2
    if ctx.eq("scs.calc.div", op, "div"):
        # reachable division by zero when arg2 == 0
        return a1 / a2
    if ctx.eq("scs.calc.pow", op, "pow"):
        return math.sqrt(abs(a1))
    return 0.0


def _scs_cookie(ctx, name, val, site):
    _require(name, val, site)
    name, val, site = _s(name), _s(val), _s(site)
    if ctx.eq("scs.cookie.sid", name, "sid"):
        if ctx.eq("scs.cookie.site", site, "app"):
            return f"sid={val}; Domain={site}"
        return "rejected-domain"
    if ctx.eq("scs.cookie.ui", name, "ui"):
        if ctx.eq("scs.cookie.dark", val, "dark"):
            return "ui=dark"
        return "ui=light"
    return "ignored"


_DAYS = ("mon", "tue", "wed", "thu", "fri", "sat", "sun")
_MONTHS = ("jan", "feb", "mar", "apr", "may", "jun",
           "jul", "aug", "sep", "oct", "nov", "dec")


def _scs_date_rank(ctx, dayname, monthname):
    _require(dayname, monthname)
    dayname, monthname = _s(dayname), _s(monthname)
    day_rank = -1
    for i, day in enumerate(_DAYS):
        if ctx.eq(f"scs.date.day_{day}", dayname, day):
            day_rank = i
            break
    month_rank = -1
    for i, month in enumerate(_MONTHS):
        if ctx.eq(f"scs.date.mon_{month}", monthname, month):
            month_rank = i
            break
    if ctx.num("scs.date.both", min(day_rank, month_rank), 0, ">="):
        return day_rank * 12 + month_rank
    return -1


def _scs_file_prefix(ctx, prefix, path):
    _require(prefix, path)
    prefix, path = _s(prefix), _s(path)
    if ctx.num("scs.prefix.len", len(path), len(prefix), ">="):
        if ctx.eq("scs.prefix.match", path[:len(prefix)], prefix):
            return path[len(prefix):]
    return ""


def _scs_vault_open(ctx, user, pin):
    _require(user, pin)
    user, pin = _s(user), _s(pin)
    rows = ctx.store.find("vault_pins", user=user)
    if ctx.num("scs.vault.known_user", len(rows), 0, "=="):
        return "unknown-user"
    # only reachable once vault_pins has rows (seed data required)
    if ctx.eq("scs.vault.pin", pin, str(rows[0].get("pin", ""))):
        return "open"
    return "denied"


def _scs_digit_sum(ctx, digits):
    _require(digits)
    digits = _s(digits)
    if ctx.num("scs.dsum.empty", len(digits), 0, "=="):
        raise ServiceFault("Rejected", "empty input")
    total = 0
    for i, ch in enumerate(digits[:16]):
        if not ctx.num(f"scs.dsum.digit_{min(i, 3)}", ord(ch), ord("0"), ">=") or \
                not ctx.num(f"scs.dsum.digit_hi_{min(i, 3)}", ord(ch), ord("9"), "<="):
            raise ServiceFault("Rejected", f"non-digit at {i}")
        total += ord(ch) - ord("0")
    if ctx.num("scs.dsum.magic", total, 42, "=="):
        return -1
    return total


def _scs_title(ctx, honorific, surname):
    _require(honorific, surname)
    honorific, surname = _s(honorific), _s(surname)
    for word in ("mr", "mrs", "ms", "dr", "prof"):
        if ctx.eq(f"scs.title.{word}", honorific, word):
            return f"{word}. {surname}"
    return surname


def _scs_text_between(ctx, text, open_tag, close_tag):
    _require(text, open_tag, close_tag)
    text, open_tag, close_tag = _s(text), _s(open_tag), _s(close_tag)
    if ctx.num("scs.between.open_len", len(open_tag), 0, "==") or \
            ctx.num("scs.between.close_len", len(close_tag), 0, "=="):
        return None
    start = -1
    for i in range(len(text) - len(open_tag) + 1):
        if ctx.eq("scs.between.open", text[i:i + len(open_tag)], open_tag):
            start = i + len(open_tag)
            break
    if ctx.num("scs.between.found_open", start, 0, "<"):
        return None
    for j in range(start, len(text) - len(close_tag) + 1):
        if ctx.eq("scs.between.close", text[j:j + len(close_tag)], close_tag):
            return text[start:j]
    return None


def _scs_split_words(ctx, text):
    _require(text)
    text = _s(text)
    if ctx.num("scs.split.empty", len(text), 0, "=="):
        return []
    words = [w for w in text.split(" ") if w]
    out = []
    for word in words:
        if ctx.eq("scs.split.stop", word, "end"):
            break
        out.append(word)
    return out


def _scs_ordered(ctx, a, b, c):
    _require(a, b, c)
    a, b, c = _s(a), _s(b), _s(c)
    if ctx.num("scs.ord.a_len", len(a), 0, "==") or \
            ctx.num("scs.ord.b_len", len(b), 0, "==") or \
            ctx.num("scs.ord.c_len", len(c), 0, "=="):
        return -1
    if ctx.num("scs.ord.ab", ord(a[0]), ord(b[0]), "<") and \
            ctx.num("scs.ord.bc", ord(b[0]), ord(c[0]), "<"):
        return 1
    if ctx.num("scs.ord.ba", ord(a[0]), ord(b[0]), ">") and \
            ctx.num("scs.ord.cb", ord(b[0]), ord(c[0]), ">"):
        return 2
    return 0


def _scs_zip_check(ctx, zip_code):
    _require(zip_code)
    zip_code = _s(zip_code)
    if not ctx.num("scs.zip.len", len(zip_code), 5, "=="):
        raise ServiceFault("Rejected", "must be 5 characters")
    for i, ch in enumerate(zip_code):
        if not ctx.num(f"scs.zip.d{i}", ord(ch), ord("0"), ">=") or \
                not ctx.num(f"scs.zip.d{i}_hi", ord(ch), ord("9"), "<="):
            raise ServiceFault("Rejected", f"non-digit at {i}")
    if ctx.eq("scs.zip.legacy", zip_code, "99999"):
        raise WrappedFault(RuntimeError("legacy routing table overflow"))
    return f"zip:{zip_code}"


def build_scs_analog(init_data: Optional[dict] = None) -> SimulatedService:
    store = SimTableStore()
    store.create_table("vault_pins")
    if init_data:
        store.load_init_data(init_data)
    return SimulatedService(
        name="scs",
        schema=parse_thrift_idl(SCS_IDL),
        store=store,
        probes=ProbeRegistry(),
        bodies={
            "calc": _scs_calc,
            "cookie": _scs_cookie,
            "dateRank": _scs_date_rank,
            "filePrefix": _scs_file_prefix,
            "vaultOpen": _scs_vault_open,
            "digitSum": _scs_digit_sum,
            "title": _scs_title,
            "textBetween": _scs_text_between,
            "splitWords": _scs_split_words,
            "ordered": _scs_ordered,
            "zipCheck": _scs_zip_check,
        },
        description="string matching problems",
    )


# --- auth demo service --------------------------------------------------------------

AUTHDEMO_IDL = """
namespace java org.example.authdemo

struct Session {
  1: string value
}

struct Status {
  1: string code
}

exception AuthError {
  1: string reason
}

service AuthDemoService {
  Session login(1: string user, 2: string password)
  string getSecret(1: string key) throws (1: AuthError err)
  Status setFlag(1: string name, 2: bool enabled)
  i32 revokeAll()
}
"""


def _auth_login(ctx, user, password):
    _require(user, password)
    user, password = _s(user), _s(password)
    accounts = ctx.store.find("accounts", user=user)
    if ctx.num("auth.login.known", len(accounts), 0, "=="):
        raise ServiceFault("AuthError", "unknown account")
    if not ctx.eq("auth.login.password", password,
                  str(accounts[0].get("password", ""))):
        raise ServiceFault("AuthError", "bad credentials")
    token = f"tok-{user}"
    if not ctx.store.find("sessions", token=token):
        ctx.store.insert("sessions", {"token": token, "user": user})
    return {"value": token}


def _auth_require(ctx) -> str:
    token = str(ctx.auth.get("token", ""))
    valid = ctx.store.find("sessions", token=token)
    if ctx.num("auth.token.valid", len(valid), 0, "=="):
        raise ServiceFault("AuthError", "missing or invalid token")
    return token


def _auth_get_secret(ctx, key):
    _require(key)
    _auth_require(ctx)
    key = _s(key)
    if ctx.eq("auth.secret.flag", key, "flag"):
        return "hunter2"
    return ""


def _auth_set_flag(ctx, name, enabled):
    _auth_require(ctx)
    name = _s(name)
    if bool(enabled):
        return {"code": "OK"}
    if ctx.eq("auth.flag.crash", name, "crash"):
        return {"code": "ERR_SERVICE"}
    return {"code": "ERR_OTHER"}


def _auth_revoke_all(ctx):
    count = len(ctx.store.rows("sessions"))
    ctx.store.delete("sessions")
    return count


AUTHDEMO_INIT = {"accounts": [{"user": "admin", "password": "s3cr3t"}],
                 "sessions": []}


def build_authdemo() -> SimulatedService:
    store = SimTableStore()
    store.load_init_data(AUTHDEMO_INIT)
    store.add_foreign_key("sessions", "accounts")
    schema = parse_thrift_idl(AUTHDEMO_IDL)
    auth = AuthSpec(
        mode=AuthMode.DYNAMIC,
        login_function="AuthDemoService.login",
        login_args=["admin", "s3cr3t"],
        token_extraction_path="value",
        token_injection_path="token",
        scope=["getSecret", "setFlag", "revokeAll"],
    )
    schema.auth = auth
    for fn in schema.all_functions():
        if auth.applies_to(fn.action_name) and fn.action_name != "login":
            fn.is_authorized = True
            fn.auth_setup = auth
    return SimulatedService(
        name="authdemo",
        schema=schema,
        store=store,
        probes=ProbeRegistry(),
        bodies={
            "login": _auth_login,
            "getSecret": _auth_get_secret,
            "setFlag": _auth_set_flag,
            "revokeAll": _auth_revoke_all,
        },
        default_auth=auth,
        default_categorizer="status-code",
        description="dynamic auth and categorized responses",
    )


HARNESS_BUILDERS: dict[str, Callable[[], SimulatedService]] = {
    "ncs": build_ncs_analog,
    "scs": build_scs_analog,
    "authdemo": build_authdemo,
}


def build_harness(name: str) -> SimulatedService:
    builder = HARNESS_BUILDERS.get(name)
    if builder is None:
        known = ", ".join(sorted(HARNESS_BUILDERS))
        raise KeyError(f"unknown harness {name!r}; available: {known}")
    return builder()


def catalog() -> list[tuple[str, int, str]]:
    out = []
    for name in sorted(HARNESS_BUILDERS):
        service = HARNESS_BUILDERS[name]()
        out.append((name, service.function_count(), service.description))
    return out
