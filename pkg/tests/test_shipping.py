import math

import numpy as np
import pytest

from renewpull.commodities import Commodity
from renewpull.finance import annuity
from renewpull.shipping import (
    NoPortsError,
    OceanGraph,
    Port,
    ShipSpec,
    derive_cardinal,
    haversine_nm,
    import_cost,
    load_ports,
    select_ports,
    voyage_cost,
)
from renewpull.shipping.routing import SnapError, load_ocean_mask, write_ocean_mask

from oracles import all_paths_shortest


def _port(region="AAA", name="p", lat=0.0, lon=0.0, length=None, breadth=None,
          draught=None, cardinal=None):
    return Port(region=region, name=name, lat=lat, lon=lon, max_length=length,
                max_breadth=breadth, max_draught=draught, cardinal=cardinal)


class TestPorts:
    def test_single_port_selected_for_its_direction(self):
        ports = [_port(name="only", length=200.0, cardinal="E")]
        chosen = select_ports(ports, "AAA")
        assert chosen == {"E": ports[0]}

    def test_longest_ship_wins(self):
        ports = [
            _port(name="big", length=300.0, cardinal="N"),
            _port(name="small", length=250.0, cardinal="N"),
        ]
        assert select_ports(ports, "AAA")["N"].name == "big"

    def test_breadth_fallback_when_length_missing(self):
        ports = [
            _port(name="wide", breadth=45.0, cardinal="N"),
            _port(name="narrow", breadth=40.0, cardinal="N"),
        ]
        assert select_ports(ports, "AAA")["N"].name == "wide"

    def test_length_beats_any_breadth(self):
        ports = [
            _port(name="has_length", length=180.0, cardinal="N"),
            _port(name="wide_only", breadth=60.0, draught=20.0, cardinal="N"),
        ]
        assert select_ports(ports, "AAA")["N"].name == "has_length"

    def test_manual_override(self):
        ports = [
            _port(name="big", length=300.0, cardinal="N"),
            _port(name="preferred", length=100.0, cardinal="N"),
        ]
        chosen = select_ports(ports, "AAA", overrides={("AAA", "N"): "preferred"})
        assert chosen["N"].name == "preferred"

    def test_region_without_ports_raises(self):
        with pytest.raises(NoPortsError):
            select_ports([_port(region="BBB", length=1.0, cardinal="N")], "AAA")

    def test_cardinal_derivation(self):
        assert derive_cardinal(10.0, 0.0, 0.0, 0.0) == "N"
        assert derive_cardinal(-10.0, 0.0, 0.0, 0.0) == "S"
        assert derive_cardinal(0.0, 10.0, 0.0, 0.0) == "E"
        assert derive_cardinal(0.0, -10.0, 0.0, 0.0) == "W"

    def test_port_requires_a_dimension(self):
        with pytest.raises(ValueError, match="length/breadth/draught"):
            _port(name="bare")

    def test_load_ports_csv(self, tmp_path):
        path = tmp_path / "ports.csv"
        path.write_text(
            "region,name,lat,lon,max_length,max_breadth,max_draught\n"
            "AAA,north,50.0,10.0,300,,\n"
            "AAA,south,40.0,10.0,,45,\n"
        )
        ports = load_ports(path)
        assert len(ports) == 2
        by_name = {p.name: p for p in ports}
        assert by_name["north"].cardinal == "N"
        assert by_name["south"].cardinal == "S"
        assert by_name["north"].max_breadth is None


def _ring_graph():
    """10x10 raster with a water perimeter ring and a canal shortcut."""
    water = np.zeros((10, 10), dtype=bool)
    water[0, :] = True
    water[9, :] = True
    water[:, 0] = True
    water[:, 9] = True
    graph = OceanGraph(water, lat_top=50.0, lon_left=0.0, cell_deg=1.0, wrap_lon=False)
    # shortcut across the middle between the two side corridors
    graph.add_canal("mid", graph.cell_center((5, 0)), graph.cell_center((5, 9)),
                    toll_eur=1000.0)
    return graph


class TestRouting:
    def test_same_point_is_zero(self):
        graph = _ring_graph()
        a = graph.cell_center((0, 0))
        route = graph.route(a, a)
        assert route.distance_nm == 0.0
        assert route.canals == ()

    def test_symmetry_is_exact(self):
        graph = _ring_graph()
        cells = [(0, 0), (5, 0), (9, 9), (0, 7), (5, 9)]
        for i in range(len(cells)):
            for j in range(i + 1, len(cells)):
                a = graph.cell_center(cells[i])
                b = graph.cell_center(cells[j])
                fwd = graph.route(a, b)
                rev = graph.route(b, a)
                assert fwd.distance_nm == rev.distance_nm  # bit-exact

    def test_shortest_path_matches_exhaustive_enumeration(self):
        graph = _ring_graph()
        adjacency = {
            node: [(nbr, w) for nbr, w, _ in edges]
            for node, edges in graph._adjacency.items()
        }
        for start, goal in [((5, 0), (5, 9)), ((0, 0), (9, 9)), ((0, 3), (9, 6))]:
            route = graph.route(graph.cell_center(start), graph.cell_center(goal))
            exact = all_paths_shortest(adjacency, start, goal)
            assert route.distance_nm * 1e6 == pytest.approx(exact, abs=0.5)

    def test_canal_used_only_when_it_helps(self):
        graph = _ring_graph()
        a = graph.cell_center((5, 0))
        b = graph.cell_center((5, 9))
        via_canal = graph.route(a, b)
        assert via_canal.canals == ("mid",)
        around = graph.route(a, b, closed_canals=("mid",))
        assert around is not None
        assert around.canals == ()
        assert around.distance_nm > via_canal.distance_nm

    def test_closing_a_canal_never_shortens(self):
        graph = _ring_graph()
        pairs = [((0, 0), (9, 9)), ((5, 0), (5, 9)), ((0, 5), (9, 5))]
        for s, g in pairs:
            open_route = graph.route(graph.cell_center(s), graph.cell_center(g))
            closed = graph.route(graph.cell_center(s), graph.cell_center(g),
                                 closed_canals=("mid",))
            assert closed.distance_nm >= open_route.distance_nm

    def test_unreachable_pair_returns_none(self):
        water = np.zeros((4, 7), dtype=bool)
        water[:, 0:2] = True
        water[:, 5:7] = True
        graph = OceanGraph(water, lat_top=10.0, lon_left=0.0, cell_deg=1.0,
                           wrap_lon=False)
        a = graph.cell_center((1, 0))
        b = graph.cell_center((1, 6))
        assert graph.route(a, b, snap_radius=1) is None

    def test_triangle_inequality(self):
        water = np.ones((8, 16), dtype=bool)
        graph = OceanGraph(water, lat_top=20.0, lon_left=0.0, cell_deg=1.0,
                           wrap_lon=False)
        rng = np.random.default_rng(9)
        cells = [(int(rng.integers(8)), int(rng.integers(16))) for _ in range(9)]
        for a, b, c in zip(cells[0::3], cells[1::3], cells[2::3]):
            d_ab = graph.route(graph.cell_center(a), graph.cell_center(b)).distance_nm
            d_bc = graph.route(graph.cell_center(b), graph.cell_center(c)).distance_nm
            d_ac = graph.route(graph.cell_center(a), graph.cell_center(c)).distance_nm
            assert d_ac <= d_ab + d_bc + 1e-9

    def test_snap_radius_enforced(self):
        water = np.zeros((9, 9), dtype=bool)
        water[0, 0] = True
        graph = OceanGraph(water, lat_top=10.0, lon_left=0.0, cell_deg=1.0,
                           wrap_lon=False)
        with pytest.raises(SnapError):
            graph.snap(2.0, 7.5, max_radius=3)

    def test_mask_round_trip(self, tmp_path):
        water = np.zeros((5, 8), dtype=bool)
        water[2, :] = True
        path = tmp_path / "mask.csv"
        write_ocean_mask(path, water, lat_top=30.0, lon_left=-10.0, cell_deg=2.0,
                         wrap=False)
        graph = load_ocean_mask(path)
        assert graph.n_lat == 5 and graph.n_lon == 8
        assert np.array_equal(graph.water, water)
        assert graph.cell_deg == 2.0 and not graph.wrap_lon


def _ship(**overrides):
    base = dict(
        cargo=Commodity.OLEFINS, capacity_t=5.0e4, speed_kn=14.0, capex=6.0e7,
        lifetime=20, maintenance=0.03, insurance=0.01, labor=2.0e6,
        port_days=1.5, port_fee=5.0e4, availability_h=8400.0,
    )
    base.update(overrides)
    return ShipSpec(**base)


class TestVoyageCost:
    def test_zero_distance_formula_collapse(self):
        ship = _ship(maintenance=0.0, insurance=0.0, labor=0.0, port_fee=0.0,
                     port_days=2.0, capex=1.0e7, lifetime=10)
        report = voyage_cost(0.0, [], ship, rate=0.05)
        trips = 8400.0 / (2.0 * 2.0 * 24.0)
        expected = annuity(0.05, 10) * 1.0e7 / (trips * 5.0e4)
        assert report.specific_cost == pytest.approx(expected, rel=1e-12)

    def test_capex_only_hand_case(self):
        # 3600 nm at 10 kn plus 2.5 port days: 840 h round trip, 10 trips/yr
        ship = ShipSpec(
            cargo=Commodity.METHANOL, capacity_t=5.0e4, speed_kn=10.0, capex=1.0e8,
            lifetime=20, port_days=2.5, availability_h=8400.0,
        )
        report = voyage_cost(3600.0, [], ship, rate=0.08)
        assert report.round_trips_per_year == pytest.approx(10.0, rel=1e-12)
        assert report.annual_throughput_t == pytest.approx(5.0e5, rel=1e-12)
        assert report.specific_cost == pytest.approx(20.3704417, abs=2e-7)
        assert report.specific_cost == pytest.approx(
            annuity(0.08, 20) * 1.0e8 / 5.0e5, rel=1e-12
        )

    def test_doubling_distance_strictly_raises_cost(self):
        ship = _ship()
        near = voyage_cost(2000.0, [], ship, rate=0.06)
        far = voyage_cost(4000.0, [], ship, rate=0.06)
        assert far.specific_cost > near.specific_cost

    def test_components_reconcile_with_specific_cost(self):
        ship = _ship(fuel_per_nm=12.0)
        report = voyage_cost(5500.0, ["suez"], ship, tolls={"suez": 4.0e5}, rate=0.06)
        total = sum(report.components.values())
        assert report.specific_cost == pytest.approx(
            total / report.annual_throughput_t, rel=1e-9
        )
        assert report.components["canal_tolls"] == pytest.approx(
            report.round_trips_per_year * 2.0 * 4.0e5, rel=1e-12
        )

    def test_missing_toll_schedule_rejected(self):
        with pytest.raises(ValueError, match="toll"):
            voyage_cost(1000.0, ["panama"], _ship(), tolls={})

    def test_fractional_trips_flagged(self):
        slow = _ship(speed_kn=1.0, availability_h=8000.0)
        report = voyage_cost(9000.0, [], slow, rate=0.06)
        assert report.round_trips_per_year < 1.0
        assert report.fractional_trips

    def test_monotonic_sweeps(self):
        rng = np.random.default_rng(21)
        base = dict(distance=3000.0, capacity=5.0e4, availability=8400.0,
                    capex=6.0e7, port_fee=5.0e4)
        for _ in range(200):
            params = dict(base)
            key = rng.choice(list(base))
            report_lo = _voyage_with(params, rate=0.06)
            params[key] = params[key] * float(rng.uniform(1.1, 2.0))
            report_hi = _voyage_with(params, rate=0.06)
            increasing = key in ("distance", "capex", "port_fee")
            if increasing:
                assert report_hi.specific_cost >= report_lo.specific_cost - 1e-12
            else:
                assert report_hi.specific_cost <= report_lo.specific_cost + 1e-12


def _voyage_with(params, rate):
    ship = _ship(capacity_t=params["capacity"], capex=params["capex"],
                 port_fee=params["port_fee"], availability_h=min(params["availability"], 8760.0))
    return voyage_cost(params["distance"], [], ship, rate=rate)


class TestImportCost:
    def test_arithmetic(self):
        report = voyage_cost(0.0, [], _ship(port_days=1.0), rate=0.06)
        fake = report.__class__(
            distance_nm=5000.0, canals=(), round_trips_per_year=10.0,
            annual_throughput_t=5e5, specific_cost=60.0,
            components={"capital": 3.0e7},
        )
        assert import_cost(2500.0, fake, 0.0) == pytest.approx(2560.0, rel=1e-12)

    def test_zero_voyage_cost(self):
        fake = voyage_cost(0.0, [], ShipSpec(
            cargo=Commodity.HYDROGEN, capacity_t=1.0, speed_kn=10.0, capex=0.0,
            lifetime=20, port_days=1.0,
        ), rate=0.0)
        assert fake.specific_cost == 0.0
        assert import_cost(1200.0, fake, 300.0) == pytest.approx(1500.0, rel=1e-12)

    def test_transport_share_can_reach_half_for_cheap_goods(self):
        ship = _ship(capacity_t=2.0e4, capex=4.0e7)
        report = voyage_cost(8000.0, [], ship, rate=0.06)
        production = report.specific_cost  # cement-like: cheap product, long haul
        share = report.specific_cost / import_cost(production, report, 0.0)
        assert share == pytest.approx(0.5, abs=1e-12)

    def test_negative_inputs_rejected(self):
        report = voyage_cost(100.0, [], _ship(), rate=0.06)
        with pytest.raises(ValueError):
            import_cost(-1.0, report, 0.0)


def test_haversine_equator_degree():
    # one degree of longitude at the equator is sixty nautical miles
    assert haversine_nm(0.0, 0.0, 0.0, 1.0) == pytest.approx(60.04, abs=0.2)
