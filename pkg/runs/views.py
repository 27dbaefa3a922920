"""
Read-only access to stored runs and two on-demand computations.
"""

import logging

from django.http import HttpResponse
from rest_framework import status, viewsets
from rest_framework.decorators import api_view
from rest_framework.response import Response

from core.exceptions import LoopCurveError
from critical.exports import export_phase_table_csv
from critical.services import phase_table
from spectral_curve.params import ModelParams
from spectral_curve.services import solve_endpoints

from .models import RunRecord
from .serializers import RunRecordSerializer

logger = logging.getLogger(__name__)


class RunRecordViewSet(viewsets.ReadOnlyModelViewSet):
    queryset = RunRecord.objects.all()
    serializer_class = RunRecordSerializer

    def get_queryset(self):
        queryset = super().get_queryset()
        run_status = self.request.query_params.get('status')
        if run_status:
            queryset = queryset.filter(status=run_status)
        return queryset


def _bad_request(message):
    return Response({'error': message}, status=status.HTTP_400_BAD_REQUEST)


@api_view(['GET'])
def phases(request):
    """Phase table for ?dmax=&mu=, as JSON or (with ?as=csv) CSV."""
    try:
        d_max = int(request.query_params['dmax'])
        mu = float(request.query_params['mu'])
    except (KeyError, ValueError):
        return _bad_request('dmax (integer) and mu (float) are required')
    if not 0 < mu < 1:
        return _bad_request('mu must lie in (0, 1)')
    try:
        records = phase_table(d_max, mu)
    except LoopCurveError as exc:
        return _bad_request(str(exc))
    if request.query_params.get('as') == 'csv':
        response = HttpResponse(content_type='text/csv')
        response['Content-Disposition'] = f'attachment; filename="phases_d{d_max}.csv"'
        return export_phase_table_csv(records, stream=response)
    return Response([record.to_record() for record in records])


@api_view(['GET'])
def geometry(request):
    """Solved endpoints for ?n=&t=&c=&hat_pot=t3,t4,... (the fully packed potential when hat_pot is absent)."""
    try:
        n = float(request.query_params['n'])
        t = float(request.query_params['t'])
        c = float(request.query_params['c'])
        raw = request.query_params.get('hat_pot', '')
        couplings = [float(v) for v in raw.split(',') if v.strip()]
    except (KeyError, ValueError):
        return _bad_request('n, t and c (floats) are required; hat_pot is a comma-separated list')
    try:
        params = ModelParams.from_hat(n, t, c, (0, 0, 0, *couplings))
        geom = solve_endpoints(params)
    except LoopCurveError as exc:
        logger.warning('geometry request failed: %s', exc)
        return _bad_request(str(exc))
    return Response(geom.to_record())
