"""Two-band local clustering over a deterministic virtual-time event queue.

Stations self-organize into clusters with a FLOC-style protocol. Each
cluster has one head; member stations sit either in the head's inner band
(IB, within ``unit_distance``) or outer band (OB, within
``outband_distance``). Messages propagate with a fixed delay and reach
every station within ``outband_distance`` of the sender.

Protocol rules, per station:

* On arrival it draws a uniform candidacy backoff. Hearing a confirmed
  head within unit distance at any time makes it join that head as an IB
  member immediately (earliest announcement wins, then lowest id).
* When the backoff expires with no confirmed head in unit range it defers
  while any overheard candidacy is unresolved; otherwise it joins the
  nearest confirmed head within outband range as an OB member, and failing
  that it announces its own candidacy.
* A candidate withdraws (broadcasting CH_RESIGN) when it hears an
  announcement carrying an earlier (announce_time, id) key, and becomes a
  confirmed head one maximum message delay after announcing otherwise.
  Confirmation is re-broadcast so listeners can tell heads from pending
  candidates.
* An OB member that later hears a newly confirmed head within unit
  distance leaves its cluster and joins the new head as an IB member. IB
  membership never migrates. This single migration kind is what keeps
  every OB member out of unit range of foreign heads once the queue
  drains.

All randomness comes from numpy generators seeded by the caller, and the
event queue breaks time ties by insertion order, so a seed fixes the whole
event trace. ``add_node`` and ``remove_node`` replay the same rules
locally for churn repair.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np


class Band(str, Enum):
    IB = "IB"
    OB = "OB"


class NodeStatus(Enum):
    IDLE = "IDLE"
    CANDIDATE = "CANDIDATE"
    CLUSTER_HEAD = "CLUSTER_HEAD"
    IB_MEMBER = "IB_MEMBER"
    OB_MEMBER = "OB_MEMBER"


TERMINAL = (NodeStatus.CLUSTER_HEAD, NodeStatus.IB_MEMBER, NodeStatus.OB_MEMBER)


class MsgKind(Enum):
    CANDIDACY_ANNOUNCE = "CANDIDACY_ANNOUNCE"
    JOIN_REQUEST = "JOIN_REQUEST"
    JOIN_ACK = "JOIN_ACK"
    CH_RESIGN = "CH_RESIGN"
    LEAVE_NOTICE = "LEAVE_NOTICE"


class ProtocolError(RuntimeError):
    pass


class NonConvergenceError(RuntimeError):
    def __init__(self, message, unsettled=()):
        super().__init__(message)
        self.unsettled = list(unsettled)


@dataclass(frozen=True)
class FlocParams:
    unit_distance_m: float = 100.0
    outband_distance_m: float = 200.0
    arrival_window_s: float = 10.0
    backoff_max_s: float = 1.0
    message_delay_s: float = 0.01
    convergence_budget_s: float = 60.0

    def validate(self):
        if not 0 < self.unit_distance_m < self.outband_distance_m:
            raise ValueError("need 0 < unit_distance_m < outband_distance_m")
        if self.message_delay_s <= 0 or self.backoff_max_s < 0:
            raise ValueError("message_delay_s must be > 0, backoff_max_s >= 0")
        if self.arrival_window_s < 0 or self.convergence_budget_s <= 0:
            raise ValueError("bad arrival window or convergence budget")
        return self


@dataclass(frozen=True)
class FlocMessage:
    kind: MsgKind
    sender: int
    sender_pos: tuple
    announce_time: float = None
    confirmed: bool = False
    band: Band = None
    cluster_id: int = None


@dataclass(frozen=True)
class PeerView:
    position: tuple
    announce_time: float
    confirmed: bool = False
    withdrawn: bool = False


@dataclass
class NodeState:
    node_id: int
    position: tuple
    status: NodeStatus = NodeStatus.IDLE
    arrived: bool = False
    backoff_expired: bool = False
    announce_time: float = None
    head_id: int = None
    band: Band = None
    pending_join: tuple = None  # (head id, Band) awaiting JOIN_ACK
    members: dict = field(default_factory=dict)  # id -> Band, heads only
    peers: dict = field(default_factory=dict)  # id -> PeerView

    def copy(self):
        dup = NodeState(
            node_id=self.node_id,
            position=self.position,
            status=self.status,
            arrived=self.arrived,
            backoff_expired=self.backoff_expired,
            announce_time=self.announce_time,
            head_id=self.head_id,
            band=self.band,
            pending_join=self.pending_join,
        )
        dup.members = dict(self.members)
        dup.peers = dict(self.peers)
        return dup


# -- events and actions ------------------------------------------------------


@dataclass(frozen=True)
class Arrival:
    node: int
    backoff_s: float


@dataclass(frozen=True)
class TimerFire:
    node: int
    kind: str  # "backoff" | "confirm"
    tag: float = None  # announce time, guards stale confirm timers


@dataclass(frozen=True)
class Delivery:
    node: int
    msg: FlocMessage


@dataclass(frozen=True)
class Broadcast:
    msg: FlocMessage


@dataclass(frozen=True)
class Unicast:
    dest: int
    msg: FlocMessage


@dataclass(frozen=True)
class StartTimer:
    kind: str
    delay_s: float
    tag: float = None


class EventQueue:
    """Min-heap on (time, insertion order); payloads never compared."""

    def __init__(self):
        self._heap = []
        self._seq = 0

    def push(self, time, item):
        heapq.heappush(self._heap, (time, self._seq, item))
        self._seq += 1

    def pop(self):
        time, _, item = heapq.heappop(self._heap)
        return time, item

    def __len__(self):
        return len(self._heap)


def _dist(a_pos, b_pos):
    return math.hypot(a_pos[0] - b_pos[0], a_pos[1] - b_pos[1])


def _note_peer(node, msg):
    """Keep the peer table current for announcements and withdrawals.

    Runs for every delivery, before arrival too: a station that shows up
    late must not mistake an already-withdrawn candidacy for a pending
    one, or it would defer forever waiting for it to resolve.
    """
    if msg.kind is MsgKind.CH_RESIGN:
        old = node.peers.get(msg.sender)
        if old is not None:
            node.peers[msg.sender] = replace(old, withdrawn=True, confirmed=False)
        return
    if msg.kind is not MsgKind.CANDIDACY_ANNOUNCE:
        return
    old = node.peers.get(msg.sender)
    withdrawn = old.withdrawn if (old and not msg.confirmed) else False
    node.peers[msg.sender] = PeerView(
        position=msg.sender_pos,
        announce_time=msg.announce_time,
        confirmed=msg.confirmed or (old.confirmed if old else False),
        withdrawn=withdrawn,
    )


def _confirmed_heads(node, max_range):
    found = []
    for pid, pv in node.peers.items():
        if pv.confirmed and not pv.withdrawn:
            if _dist(node.position, pv.position) <= max_range:
                found.append((pv.announce_time, pid))
    return found


def _has_pending_candidacy(node):
    return any(
        not pv.confirmed and not pv.withdrawn and pv.announce_time is not None
        for pv in node.peers.values()
    )


def _join(node, head_id, band):
    node.pending_join = (head_id, band)
    return [
        Unicast(
            head_id,
            FlocMessage(
                MsgKind.JOIN_REQUEST, node.node_id, node.position, band=band
            ),
        )
    ]


def _evaluate(node, now, params):
    """Decide what an undecided station does right now.

    Order matters: an IB join to a confirmed head beats everything; then
    the station waits out any unresolved candidacy it has overheard; then
    it settles for an OB join; only with nothing in radio range does it
    announce its own candidacy.

    IB joins take the earliest-announced head (it is also the first one
    heard, so deciding on delivery and deciding here agree). OB joins take
    the nearest head instead: spreading outer members across nearby heads
    is what keeps cluster sizes in check, where earliest-wins would funnel
    every outer node of a neighborhood into its oldest cluster.
    """
    if not node.arrived or node.status is not NodeStatus.IDLE or node.pending_join:
        return []
    in_unit = _confirmed_heads(node, params.unit_distance_m)
    if in_unit:
        _, head = min(in_unit)
        return _join(node, head, Band.IB)
    if not node.backoff_expired:
        return []
    if _has_pending_candidacy(node):
        return []
    in_outband = _confirmed_heads(node, params.outband_distance_m)
    if in_outband:
        head = min(
            in_outband,
            key=lambda ap: (_dist(node.position, node.peers[ap[1]].position),) + ap,
        )[1]
        return _join(node, head, Band.OB)
    node.status = NodeStatus.CANDIDATE
    node.announce_time = now
    announce = FlocMessage(
        MsgKind.CANDIDACY_ANNOUNCE,
        node.node_id,
        node.position,
        announce_time=now,
        confirmed=False,
    )
    return [Broadcast(announce), StartTimer("confirm", params.message_delay_s, tag=now)]


def _withdraw_if_beaten(node, msg, now, params):
    """A candidate defers to any earlier (announce_time, id) key it hears."""
    if node.status is not NodeStatus.CANDIDATE:
        return []
    if (msg.announce_time, msg.sender) < (node.announce_time, node.node_id):
        node.status = NodeStatus.IDLE
        node.announce_time = None
        resign = FlocMessage(MsgKind.CH_RESIGN, node.node_id, node.position)
        return [Broadcast(resign)] + _evaluate(node, now, params)
    return []


def _migrate_to(node, new_head, now, params):
    actions = []
    if node.head_id is not None:
        actions.append(
            Unicast(
                node.head_id,
                FlocMessage(MsgKind.LEAVE_NOTICE, node.node_id, node.position),
            )
        )
    node.status = NodeStatus.IDLE
    node.head_id = None
    node.band = None
    actions += _join(node, new_head, Band.IB)
    return actions


def protocol_step(state, event, now, params):
    """Pure transition: (node state, event) -> (new state, actions).

    The driver owns delivery radii, delays and timers; this function only
    looks at one station's knowledge. Calling it twice with equal inputs
    yields equal outputs.
    """
    node = state.copy()
    actions = []

    if isinstance(event, Arrival):
        node.arrived = True
        actions.append(StartTimer("backoff", event.backoff_s))
        actions += _evaluate(node, now, params)
        return node, actions

    if isinstance(event, TimerFire):
        if event.kind == "backoff":
            node.backoff_expired = True
            actions += _evaluate(node, now, params)
        elif event.kind == "confirm":
            # stale once the candidacy it belongs to was withdrawn
            if node.status is NodeStatus.CANDIDATE and node.announce_time == event.tag:
                node.status = NodeStatus.CLUSTER_HEAD
                node.members = {}
                actions.append(
                    Broadcast(
                        FlocMessage(
                            MsgKind.CANDIDACY_ANNOUNCE,
                            node.node_id,
                            node.position,
                            announce_time=node.announce_time,
                            confirmed=True,
                        )
                    )
                )
        else:
            raise ProtocolError("unknown timer kind %r" % event.kind)
        return node, actions

    if not isinstance(event, Delivery):
        raise ProtocolError("unknown event %r" % (event,))

    msg = event.msg
    _note_peer(node, msg)
    if not node.arrived:
        # radio history only; a station acts once it has arrived
        return node, actions

    if msg.kind is MsgKind.CANDIDACY_ANNOUNCE:
        actions += _withdraw_if_beaten(node, msg, now, params)
        if msg.confirmed:
            within_unit = (
                _dist(node.position, msg.sender_pos) <= params.unit_distance_m
            )
            if node.status is NodeStatus.CLUSTER_HEAD and within_unit:
                raise ProtocolError(
                    "heads %d and %d confirmed within unit distance"
                    % (node.node_id, msg.sender)
                )
            if node.status is NodeStatus.OB_MEMBER and within_unit:
                actions += _migrate_to(node, msg.sender, now, params)
            elif node.status is NodeStatus.IDLE:
                actions += _evaluate(node, now, params)
        return node, actions

    if msg.kind is MsgKind.CH_RESIGN:
        # peer table already updated in _note_peer
        if node.status is NodeStatus.IDLE:
            actions += _evaluate(node, now, params)
        return node, actions

    if msg.kind is MsgKind.JOIN_REQUEST:
        if node.status is not NodeStatus.CLUSTER_HEAD:
            raise ProtocolError(
                "join request reached non-head %d" % node.node_id
            )
        node.members[msg.sender] = msg.band
        actions.append(
            Unicast(
                msg.sender,
                FlocMessage(
                    MsgKind.JOIN_ACK,
                    node.node_id,
                    node.position,
                    band=msg.band,
                    cluster_id=node.node_id,
                ),
            )
        )
        return node, actions

    if msg.kind is MsgKind.JOIN_ACK:
        if not node.pending_join or node.pending_join[0] != msg.sender:
            raise ProtocolError("unexpected join ack at %d" % node.node_id)
        node.pending_join = None
        node.head_id = msg.cluster_id
        node.band = msg.band
        node.status = (
            NodeStatus.IB_MEMBER if msg.band is Band.IB else NodeStatus.OB_MEMBER
        )
        if node.status is NodeStatus.OB_MEMBER:
            # a head may have confirmed in unit range while the join was in
            # flight; the migration rule applies as soon as we know
            in_unit = [
                (pv.announce_time, pid)
                for pid, pv in node.peers.items()
                if pv.confirmed
                and not pv.withdrawn
                and pid != node.head_id
                and _dist(node.position, pv.position) <= params.unit_distance_m
            ]
            if in_unit:
                _, new_head = min(in_unit)
                actions += _migrate_to(node, new_head, now, params)
        return node, actions

    if msg.kind is MsgKind.LEAVE_NOTICE:
        if node.status is NodeStatus.CLUSTER_HEAD:
            if msg.sender not in node.members:
                raise ProtocolError(
                    "leave notice from non-member %d" % msg.sender
                )
            del node.members[msg.sender]
        return node, actions

    raise ProtocolError("unknown message kind %r" % (msg.kind,))


# -- driver ------------------------------------------------------------------


def _neighbors_within(positions, radius):
    ids = sorted(positions)
    out = {i: [] for i in ids}
    for i in ids:
        for j in ids:
            if i != j and _dist(positions[i], positions[j]) <= radius:
                out[i].append(j)
    return out


def _drive(states, queue, params, deadline, trace=None):
    """Run the queue dry; returns the virtual time of the last settlement."""
    positions = {i: s.position for i, s in states.items()}
    neighbors = _neighbors_within(positions, params.outband_distance_m)
    settle_time = 0.0
    while len(queue):
        now, event = queue.pop()
        if now > deadline:
            unsettled = [
                i for i, s in states.items() if s.status not in TERMINAL
            ]
            raise NonConvergenceError(
                "clustering exceeded budget of %g s (unsettled: %s)"
                % (params.convergence_budget_s, unsettled),
                unsettled,
            )
        before = states[event.node].status
        new_state, actions = protocol_step(states[event.node], event, now, params)
        states[event.node] = new_state
        if trace is not None:
            trace.append(_describe(now, event))
        if new_state.status is not before and new_state.status in TERMINAL:
            settle_time = max(settle_time, now)
        for act in actions:
            if isinstance(act, StartTimer):
                queue.push(now + act.delay_s, TimerFire(event.node, act.kind, act.tag))
            elif isinstance(act, Broadcast):
                for other in neighbors[event.node]:
                    queue.push(
                        now + params.message_delay_s, Delivery(other, act.msg)
                    )
            elif isinstance(act, Unicast):
                if _dist(positions[event.node], positions[act.dest]) > (
                    params.outband_distance_m
                ):
                    raise ProtocolError(
                        "unicast from %d to %d exceeds radio range"
                        % (event.node, act.dest)
                    )
                queue.push(now + params.message_delay_s, Delivery(act.dest, act.msg))
            else:
                raise ProtocolError("unknown action %r" % (act,))
    stuck = [i for i, s in states.items() if s.status not in TERMINAL]
    if stuck:
        raise ProtocolError("event queue drained with unsettled nodes %s" % stuck)
    return settle_time


def _describe(now, event):
    if isinstance(event, Arrival):
        return (now, "arrival", event.node, -1, "")
    if isinstance(event, TimerFire):
        return (now, "timer:" + event.kind, event.node, -1, "")
    return (now, "msg:" + event.msg.kind.value, event.node, event.msg.sender, "")


# -- assignments -------------------------------------------------------------


@dataclass(frozen=True)
class ClusterMember:
    bs_id: int
    band: Band


@dataclass
class Cluster:
    head: int
    members: list
    announce_time: float = 0.0

    @property
    def size(self):
        return 1 + len(self.members)

    def ids(self):
        return [self.head] + [m.bs_id for m in self.members]


@dataclass
class ClusterAssignment:
    clusters: list
    convergence_time: float = 0.0
    unclustered: list = field(default_factory=list)

    def all_ids(self):
        out = []
        for c in self.clusters:
            out.extend(c.ids())
        return out

    def cluster_of(self, bs_id):
        for c in self.clusters:
            if bs_id in c.ids():
                return c
        return None

    def sizes(self):
        return [c.size for c in self.clusters]

    def to_json(self):
        return json.dumps(
            {
                "convergence_time": self.convergence_time,
                "unclustered": list(self.unclustered),
                "clusters": [
                    {
                        "head": c.head,
                        "announce_time": c.announce_time,
                        "members": [[m.bs_id, m.band.value] for m in c.members],
                    }
                    for c in self.clusters
                ],
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text):
        raw = json.loads(text)
        clusters = [
            Cluster(
                head=c["head"],
                members=[ClusterMember(i, Band(b)) for i, b in c["members"]],
                announce_time=c["announce_time"],
            )
            for c in raw["clusters"]
        ]
        return cls(
            clusters=clusters,
            convergence_time=raw["convergence_time"],
            unclustered=list(raw["unclustered"]),
        )


def _assignment_from_states(states, settle_time):
    clusters = []
    for head_id in sorted(states):
        st = states[head_id]
        if st.status is NodeStatus.CLUSTER_HEAD:
            members = [
                ClusterMember(mid, st.members[mid]) for mid in sorted(st.members)
            ]
            clusters.append(
                Cluster(head=head_id, members=members, announce_time=st.announce_time)
            )
    # cross-check member view against head view
    by_head = {c.head: set(m.bs_id for m in c.members) for c in clusters}
    for nid, st in states.items():
        if st.status in (NodeStatus.IB_MEMBER, NodeStatus.OB_MEMBER):
            if nid not in by_head.get(st.head_id, ()):  # pragma: no cover
                raise ProtocolError(
                    "member %d and head %d disagree" % (nid, st.head_id)
                )
    return ClusterAssignment(clusters=clusters, convergence_time=settle_time)


def run_clustering(layout, params=None, seed=0, trace=None):
    """Cluster a layout from scratch.

    Stations arrive uniformly over the arrival window, each with a fresh
    backoff; the protocol then runs until the event queue drains. Raises
    NonConvergenceError if virtual time passes the convergence budget.
    """
    params = (params or FlocParams()).validate()
    n = layout.n_stations
    if n == 0:
        return ClusterAssignment(clusters=[], convergence_time=0.0)
    rng = np.random.default_rng(seed)
    arrivals = rng.uniform(0.0, params.arrival_window_s, n)
    backoffs = rng.uniform(0.0, params.backoff_max_s, n)

    states = {
        b.bs_id: NodeState(b.bs_id, (b.position.x, b.position.y))
        for b in layout.stations
    }
    queue = EventQueue()
    for i, b in enumerate(layout.stations):
        queue.push(float(arrivals[i]), Arrival(b.bs_id, float(backoffs[i])))
    settle = _drive(states, queue, params, params.convergence_budget_s, trace)
    return _assignment_from_states(states, settle)


# -- churn repair ------------------------------------------------------------


def _context_states(assignment, positions, skip=()):
    """Rebuild terminal node states for every clustered station."""
    states = {}
    for c in assignment.clusters:
        if c.head in skip:
            continue
        head = NodeState(c.head, tuple(positions[c.head]))
        head.status = NodeStatus.CLUSTER_HEAD
        head.arrived = True
        head.backoff_expired = True
        head.announce_time = c.announce_time
        head.members = {m.bs_id: m.band for m in c.members if m.bs_id not in skip}
        states[c.head] = head
        for m in c.members:
            if m.bs_id in skip:
                continue
            ms = NodeState(m.bs_id, tuple(positions[m.bs_id]))
            ms.status = (
                NodeStatus.IB_MEMBER if m.band is Band.IB else NodeStatus.OB_MEMBER
            )
            ms.arrived = True
            ms.backoff_expired = True
            ms.head_id = c.head
            ms.band = m.band
            states[m.bs_id] = ms
    return states


def _prefill_peers(states, positions, heads, radius):
    for st in states.values():
        for hid, announce in heads:
            if hid == st.node_id:
                continue
            if _dist(st.position, tuple(positions[hid])) <= radius:
                st.peers[hid] = PeerView(
                    position=tuple(positions[hid]),
                    announce_time=announce,
                    confirmed=True,
                )


def _epoch_after(assignment):
    times = [c.announce_time for c in assignment.clusters]
    return (max(times) + 1.0) if times else 0.0


def add_node(assignment, positions, new_id, params=None, seed=0):
    """Insert one station into a converged assignment.

    positions maps station id -> (x, y) and must include new_id. The new
    station replays the arrival rules against the existing heads; only
    clusters with heads within 2 * outband_distance of it can change.
    """
    params = (params or FlocParams()).validate()
    if new_id in assignment.all_ids():
        raise ValueError("station %d is already clustered" % new_id)
    states = _context_states(assignment, positions)
    heads = [(c.head, c.announce_time) for c in assignment.clusters]
    _prefill_peers(states, positions, heads, params.outband_distance_m)

    epoch = _epoch_after(assignment)
    newcomer = NodeState(new_id, tuple(positions[new_id]))
    states[new_id] = newcomer
    _prefill_peers({new_id: newcomer}, positions, heads, params.outband_distance_m)

    rng = np.random.default_rng([seed, new_id])
    queue = EventQueue()
    queue.push(epoch, Arrival(new_id, float(rng.uniform(0.0, params.backoff_max_s))))
    settle = _drive(states, queue, params, epoch + params.convergence_budget_s)
    return _assignment_from_states(states, max(settle, assignment.convergence_time))


def remove_node(assignment, positions, bs_id, params=None, seed=0):
    """Remove one station, repairing locally.

    Removing a member only shrinks its cluster. Removing a head orphans
    the cluster's members, who replay the arrival rules against the
    surviving heads and each other.
    """
    params = (params or FlocParams()).validate()
    home = assignment.cluster_of(bs_id)
    if home is None:
        raise ValueError("station %d is not clustered" % bs_id)

    if bs_id != home.head:
        clusters = []
        for c in assignment.clusters:
            if c.head == home.head:
                kept = [m for m in c.members if m.bs_id != bs_id]
                clusters.append(Cluster(c.head, kept, c.announce_time))
            else:
                clusters.append(Cluster(c.head, list(c.members), c.announce_time))
        return ClusterAssignment(
            clusters=clusters, convergence_time=assignment.convergence_time
        )

    orphans = [m.bs_id for m in home.members]
    states = _context_states(assignment, positions, skip=[bs_id] + orphans)
    heads = [
        (c.head, c.announce_time) for c in assignment.clusters if c.head != bs_id
    ]
    _prefill_peers(states, positions, heads, params.outband_distance_m)

    epoch = _epoch_after(assignment)
    rng = np.random.default_rng([seed, bs_id])
    backoffs = rng.uniform(0.0, params.backoff_max_s, len(orphans))
    queue = EventQueue()
    for i, oid in enumerate(sorted(orphans)):
        orphan = NodeState(oid, tuple(positions[oid]))
        states[oid] = orphan
        _prefill_peers({oid: orphan}, positions, heads, params.outband_distance_m)
        queue.push(epoch, Arrival(oid, float(backoffs[i])))
    settle = _drive(states, queue, params, epoch + params.convergence_budget_s)
    return _assignment_from_states(states, max(settle, assignment.convergence_time))


# -- verification ------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    rule: str
    detail: str


def verify_assignment(assignment, positions, params=None):
    """Check every structural invariant; returns a list of violations.

    positions maps station id -> (x, y) for every station that should be
    covered. An empty list means the assignment is sound.
    """
    params = (params or FlocParams()).validate()
    out = []
    seen = {}
    for c in assignment.clusters:
        for i in c.ids():
            seen[i] = seen.get(i, 0) + 1
    for i, count in sorted(seen.items()):
        if count > 1:
            out.append(Violation("coverage", "station %d in %d clusters" % (i, count)))
    for i in sorted(positions):
        if i not in seen:
            out.append(Violation("coverage", "station %d unclustered" % i))
    if assignment.unclustered:
        out.append(
            Violation("coverage", "unclustered residue %s" % assignment.unclustered)
        )

    heads = [(c.head, c.announce_time) for c in assignment.clusters]
    for a in range(len(heads)):
        for b in range(a + 1, len(heads)):
            ha, hb = heads[a][0], heads[b][0]
            if _dist(positions[ha], positions[hb]) <= params.unit_distance_m:
                out.append(
                    Violation(
                        "head-separation",
                        "heads %d and %d within unit distance" % (ha, hb),
                    )
                )

    head_pos = {c.head: positions[c.head] for c in assignment.clusters}
    for c in assignment.clusters:
        for m in c.members:
            d = _dist(positions[m.bs_id], positions[c.head])
            if m.band is Band.IB and d > params.unit_distance_m:
                out.append(
                    Violation(
                        "ib-range",
                        "IB member %d is %.1f m from head %d" % (m.bs_id, d, c.head),
                    )
                )
            if m.band is Band.OB:
                if d > params.outband_distance_m:
                    out.append(
                        Violation(
                            "ob-range",
                            "OB member %d is %.1f m from head %d"
                            % (m.bs_id, d, c.head),
                        )
                    )
                for other, pos in head_pos.items():
                    if other != c.head and (
                        _dist(positions[m.bs_id], pos) <= params.unit_distance_m
                    ):
                        out.append(
                            Violation(
                                "ob-foreign-head",
                                "OB member %d of %d sits in unit range of head %d"
                                % (m.bs_id, c.head, other),
                            )
                        )
    return out
