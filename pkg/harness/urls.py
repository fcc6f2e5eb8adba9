from django.urls import path
from . import views

app_name = 'harness'

urlpatterns = [
    path('runs/', views.run_list_api, name='run_list'),
    path('runs/<int:run_id>/', views.run_detail_api, name='run_detail'),
    path('runs/single/', views.run_single_api, name='run_single'),
]
