import json
import logging

from rest_framework import status
from rest_framework.exceptions import ValidationError
from rest_framework.decorators import api_view, permission_classes
from rest_framework.pagination import PageNumberPagination
from rest_framework.permissions import AllowAny
from rest_framework.response import Response

from converter.exceptions import SimulationError
from harness.services.emitter import SimulationJSONEncoder
from harness.services.runner import run_point
from .models import SimulationRun
from .serializers import RunSpecSerializer, SimulationRunDetailSerializer, SimulationRunSerializer

logger = logging.getLogger(__name__)


class StandardResultsSetPagination(PageNumberPagination):
    page_size = 20
    page_size_query_param = 'page_size'
    max_page_size = 100


@api_view(['GET'])
@permission_classes([AllowAny])
def run_list_api(request):
    """
    API endpoint listing stored simulation runs, newest first
    """
    queryset = SimulationRun.objects.all()
    mode = request.GET.get('mode')
    if mode:
        queryset = queryset.filter(mode=mode)

    paginator = StandardResultsSetPagination()
    page = paginator.paginate_queryset(queryset, request)
    serializer = SimulationRunSerializer(page, many=True)
    return paginator.get_paginated_response(serializer.data)


@api_view(['GET'])
@permission_classes([AllowAny])
def run_detail_api(request, run_id):
    try:
        run = SimulationRun.objects.get(pk=run_id)
    except SimulationRun.DoesNotExist:
        return Response({
            'success': False,
            'error': f'Simulation run {run_id} not found.'
        }, status=status.HTTP_404_NOT_FOUND)
    return Response({
        'success': True,
        'run': SimulationRunDetailSerializer(run).data
    })


@api_view(['POST'])
@permission_classes([AllowAny])
def run_single_api(request):
    """
    API endpoint to simulate one operating point and store the result
    """
    serializer = RunSpecSerializer(data=request.data)
    if not serializer.is_valid():
        return Response({
            'success': False,
            'errors': serializer.errors
        }, status=status.HTTP_400_BAD_REQUEST)

    try:
        spec = serializer.build()
        report = run_point(spec)
    except SimulationError as exc:
        logger.warning(f"Simulation request rejected: {exc}")
        return Response({
            'success': False,
            'error': str(exc)
        }, status=status.HTTP_400_BAD_REQUEST)
    except ValidationError as exc:
        return Response({
            'success': False,
            'errors': exc.detail
        }, status=status.HTTP_400_BAD_REQUEST)

    run = SimulationRun.from_report(report, spec)
    run.save()
    logger.info(f"Stored simulation run {run.pk}")

    # numpy scalars in the report go through the encoder
    payload = json.loads(json.dumps(report.to_dict(), cls=SimulationJSONEncoder))
    return Response({
        'success': True,
        'run_id': run.pk,
        'report': payload
    }, status=status.HTTP_201_CREATED)
