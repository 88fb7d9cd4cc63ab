// expect: TruncatedSource
using UnityEngine;

public class Turret : MonoBehaviour
{
    [SerializeField] private float range = 8f;

    private void Update()
    {
        var target = GameObject.FindWithTag("Player");
        if (target != null && Vector3.Distance(transform.position, target.transform.position) <
