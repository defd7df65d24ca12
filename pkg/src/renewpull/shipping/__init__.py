"""Sea-route distances and specific transport costs."""

from renewpull.shipping.ports import NoPortsError, Port, derive_cardinal, load_ports, select_ports
from renewpull.shipping.routing import OceanGraph, Route, SnapError, haversine_nm
from renewpull.shipping.voyage import ShipSpec, VoyageCostReport, import_cost, voyage_cost

__all__ = [
    "Port",
    "NoPortsError",
    "load_ports",
    "select_ports",
    "derive_cardinal",
    "OceanGraph",
    "Route",
    "SnapError",
    "haversine_nm",
    "ShipSpec",
    "VoyageCostReport",
    "voyage_cost",
    "import_cost",
]
